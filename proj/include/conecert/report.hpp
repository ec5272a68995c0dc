#ifndef CONECERT_REPORT_HPP
#define CONECERT_REPORT_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace conecert::report {

inline constexpr const char* kToolVersion = "0.1.0";

// Minimal ordered JSON value with deterministic serialization: objects keep
// insertion order, doubles print with 17 significant digits, lines end in LF.
// Reports serialized through this class are byte-stable across runs and
// platforms with IEEE doubles.
class Json {
public:
    Json() : kind_(Kind::null) {}

    static Json object() { Json j; j.kind_ = Kind::object; return j; }
    static Json array() { Json j; j.kind_ = Kind::array; return j; }
    static Json str(std::string s) { Json j; j.kind_ = Kind::string; j.str_ = std::move(s); return j; }
    static Json boolean(bool b) { Json j; j.kind_ = Kind::boolean; j.bool_ = b; return j; }
    static Json integer(long long v) { Json j; j.kind_ = Kind::integer; j.int_ = v; return j; }
    static Json number(double v);  // non-finite values become quoted strings

    Json& set(const std::string& key, Json value);  // object insert/replace
    Json& push(Json value);                         // array append

    std::string dump(int indent = 2) const;

private:
    enum class Kind { null, boolean, integer, number, string, array, object };
    void dump_to(std::string& out, int indent, int depth) const;

    Kind kind_;
    bool bool_ = false;
    long long int_ = 0;
    std::string str_;  // holds formatted number text for Kind::number
    std::vector<Json> arr_;
    std::vector<std::pair<std::string, Json>> obj_;
};

// "%.17g" rendering used for both JSON numbers and CSV cells.
std::string format_double(double v);

// CSV with a header row, 17-significant-digit cells and LF line endings.
std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows);

// FNV-1a 64-bit, hex-encoded; used to fingerprint canonical configs.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace conecert::report

#endif
