#include "conecert/report.hpp"

#include <cmath>
#include <cstdio>

namespace conecert::report {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Json Json::number(double v) {
    if (!std::isfinite(v)) {
        return Json::str(v > 0 ? "Infinity" : (v < 0 ? "-Infinity" : "NaN"));
    }
    Json j;
    j.kind_ = Kind::number;
    j.str_ = format_double(v);
    return j;
}

Json& Json::set(const std::string& key, Json value) {
    for (auto& [k, v] : obj_) {
        if (k == key) {
            v = std::move(value);
            return *this;
        }
    }
    obj_.emplace_back(key, std::move(value));
    return *this;
}

Json& Json::push(Json value) {
    arr_.push_back(std::move(value));
    return *this;
}

namespace {
void escape_into(std::string& out, const std::string& s) {
    out += '"';
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
}
}  // namespace

void Json::dump_to(std::string& out, int indent, int depth) const {
    const std::string pad(static_cast<std::size_t>(indent) * (depth + 1), ' ');
    const std::string close_pad(static_cast<std::size_t>(indent) * depth, ' ');
    switch (kind_) {
        case Kind::null: out += "null"; break;
        case Kind::boolean: out += bool_ ? "true" : "false"; break;
        case Kind::integer: out += std::to_string(int_); break;
        case Kind::number: out += str_; break;
        case Kind::string: escape_into(out, str_); break;
        case Kind::array: {
            if (arr_.empty()) { out += "[]"; break; }
            out += "[\n";
            for (std::size_t i = 0; i < arr_.size(); ++i) {
                out += pad;
                arr_[i].dump_to(out, indent, depth + 1);
                if (i + 1 < arr_.size()) out += ',';
                out += '\n';
            }
            out += close_pad + "]";
            break;
        }
        case Kind::object: {
            if (obj_.empty()) { out += "{}"; break; }
            out += "{\n";
            for (std::size_t i = 0; i < obj_.size(); ++i) {
                out += pad;
                escape_into(out, obj_[i].first);
                out += ": ";
                obj_[i].second.dump_to(out, indent, depth + 1);
                if (i + 1 < obj_.size()) out += ',';
                out += '\n';
            }
            out += close_pad + "}";
            break;
        }
    }
}

std::string Json::dump(int indent) const {
    std::string out;
    dump_to(out, indent, 0);
    out += '\n';
    return out;
}

std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) {
        out += header[i];
        out += i + 1 < header.size() ? "," : "";
    }
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out += format_double(row[i]);
            out += i + 1 < row.size() ? "," : "";
        }
        out += '\n';
    }
    return out;
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace conecert::report
