#include "deepiv/csv.hpp"

#include <cassert>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "deepiv/errors.hpp"

namespace deepiv {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    assert(res.ec == std::errc());
    return std::string(buf, res.ptr);
}

double parse_double_field(std::string_view field, std::size_t line_no, std::size_t col_no) {
    auto fail = [&](const char* what) {
        std::ostringstream msg;
        msg << "csv line " << line_no << ", column " << col_no << ": " << what
            << " ('" << std::string(field) << "')";
        throw DomainError(msg.str());
    };
    if (field.empty()) fail("missing value");
    double v = 0.0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size())
        fail("not a number");
    if (!std::isfinite(v)) fail("non-finite value");
    return v;
}

namespace {

std::vector<std::string_view> split_line(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

// counts a 1-based run of names prefix1, prefix2, ... starting at *pos
std::size_t count_block(const std::vector<std::string_view>& names, std::size_t* pos,
                        std::string_view prefix) {
    std::size_t k = 0;
    while (*pos < names.size()) {
        std::string expect = std::string(prefix) + std::to_string(k + 1);
        if (names[*pos] != expect) break;
        ++k;
        ++*pos;
    }
    return k;
}

}  // namespace

Dataset parse_dataset_csv(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t nl = text.find('\n', start);
        std::string_view line = (nl == std::string_view::npos)
                                    ? text.substr(start)
                                    : text.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) lines.push_back(line);
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    if (lines.empty()) throw DomainError("csv: empty input");

    auto header = split_line(lines[0]);
    std::size_t pos = 0;
    if (header.empty() || header[pos] != "y")
        throw DomainError("csv: first column must be named 'y'");
    ++pos;
    const std::size_t q = count_block(header, &pos, "x");
    if (q == 0) throw DomainError("csv: expected at least one 'x1' column after 'y'");
    const std::size_t d = count_block(header, &pos, "z");
    if (d == 0) throw DomainError("csv: expected at least one 'z1' column after the x block");
    const std::size_t m = count_block(header, &pos, "r");
    if (pos != header.size()) {
        throw DomainError("csv: unexpected column '" + std::string(header[pos]) +
                          "' (schema is y, x1..xq, z1..zd, optional r1..rm)");
    }

    const std::size_t n = lines.size() - 1;
    if (n == 0) throw DomainError("csv: no data rows");
    Dataset data;
    data.y.resize(n);
    data.x = Matrix(n, q);
    data.z = Matrix(n, d);
    if (m > 0) data.r = Matrix(n, m);

    const std::size_t width = header.size();
    for (std::size_t i = 0; i < n; ++i) {
        auto fields = split_line(lines[i + 1]);
        if (fields.size() != width) {
            std::ostringstream msg;
            msg << "csv line " << (i + 2) << ": expected " << width << " fields, got "
                << fields.size();
            throw DomainError(msg.str());
        }
        std::size_t c = 0;
        data.y[i] = parse_double_field(fields[c], i + 2, c + 1);
        ++c;
        for (std::size_t j = 0; j < q; ++j, ++c) data.x(i, j) = parse_double_field(fields[c], i + 2, c + 1);
        for (std::size_t j = 0; j < d; ++j, ++c) data.z(i, j) = parse_double_field(fields[c], i + 2, c + 1);
        for (std::size_t j = 0; j < m; ++j, ++c) (*data.r)(i, j) = parse_double_field(fields[c], i + 2, c + 1);
    }
    data.validate();
    return data;
}

Dataset read_dataset_csv(const std::string& path) {
    return parse_dataset_csv(read_text_file(path));
}

std::string dataset_to_csv(const Dataset& data) {
    data.validate();
    std::string out = "y";
    for (std::size_t j = 0; j < data.q(); ++j) out += ",x" + std::to_string(j + 1);
    for (std::size_t j = 0; j < data.d(); ++j) out += ",z" + std::to_string(j + 1);
    const std::size_t m = data.r ? data.r->cols() : 0;
    for (std::size_t j = 0; j < m; ++j) out += ",r" + std::to_string(j + 1);
    out += '\n';
    for (std::size_t i = 0; i < data.n(); ++i) {
        out += format_double(data.y[i]);
        for (std::size_t j = 0; j < data.q(); ++j) out += "," + format_double(data.x(i, j));
        for (std::size_t j = 0; j < data.d(); ++j) out += "," + format_double(data.z(i, j));
        for (std::size_t j = 0; j < m; ++j) out += "," + format_double((*data.r)(i, j));
        out += '\n';
    }
    return out;
}

void write_text_file(const std::string& path, std::string_view text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DomainError("cannot open for writing: " + path);
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) throw DomainError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DomainError("cannot open: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

}  // namespace deepiv
