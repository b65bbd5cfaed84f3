#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace crit4::csv {

// RFC 4180 table; values are kept as already-formatted strings
class Table {
  public:
    explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

    template <class... Ts>
    void row(const Ts&... cells) {
        row_strings({cell(cells)...});
    }
    void row_strings(std::vector<std::string> cells);

    std::string str() const;
    void write(const std::filesystem::path& p) const;
    size_t size() const { return rows_.size(); }

    static std::string cell(double v);  // shortest round-trip form
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(const char* s) { return s; }
    static std::string cell(bool b) { return b ? "true" : "false"; }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(long v) { return std::to_string(v); }
    static std::string cell(long long v) { return std::to_string(v); }
    static std::string cell(unsigned v) { return std::to_string(v); }
    static std::string cell(unsigned long v) { return std::to_string(v); }
    static std::string cell(unsigned long long v) { return std::to_string(v); }

  private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

std::string quote(const std::string& field);

}  // namespace crit4::csv
