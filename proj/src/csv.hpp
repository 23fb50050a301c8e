#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace storychain::detail {

// Minimal RFC 4180 reader: quoted fields may contain separators, doubled
// quotes and line breaks. Tracks the physical line each record started on.
class CsvReader {
  public:
    explicit CsvReader(std::istream& in, char separator = ',') : in_(in), sep_(separator) {}

    std::optional<std::vector<std::string>> next();
    std::size_t record_line() const { return record_line_; }
    /// Set when the last record hit EOF inside an open quote.
    bool unterminated() const { return unterminated_; }

  private:
    std::istream& in_;
    char sep_;
    std::size_t line_ = 1;
    std::size_t record_line_ = 0;
    bool unterminated_ = false;
};

inline std::optional<std::vector<std::string>> CsvReader::next() {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    bool any = false;
    unterminated_ = false;
    record_line_ = line_;

    int ch;
    while ((ch = in_.get()) != EOF) {
        any = true;
        const char c = static_cast<char>(ch);
        if (quoted) {
            if (c == '"') {
                if (in_.peek() == '"') {
                    in_.get();
                    field.push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line_;
                field.push_back(c);
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
        } else if (c == sep_) {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\r') {
            // tolerated before \n
        } else if (c == '\n') {
            ++line_;
            fields.push_back(std::move(field));
            return fields;
        } else {
            field.push_back(c);
        }
    }
    if (!any) return std::nullopt;
    unterminated_ = quoted;
    fields.push_back(std::move(field));
    return fields;
}

inline std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

}  // namespace storychain::detail
