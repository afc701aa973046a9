#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "chfis/dataset.hpp"
#include "chfis/errors.hpp"
#include "chfis/parameters.hpp"
#include "chfis/solver.hpp"

namespace chfis {

namespace detail {

/// 17 significant digits: enough for doubles to round-trip exactly.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct Token {
    std::string text;
    int line;
};

inline std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> tokens;
    int line = 1;
    std::string cur;
    int cur_line = 1;
    bool in_comment = false;
    auto flush = [&] {
        if (!cur.empty()) {
            tokens.push_back({cur, cur_line});
            cur.clear();
        }
    };
    for (char ch : text) {
        if (ch == '\n') {
            flush();
            in_comment = false;
            ++line;
            continue;
        }
        if (in_comment) continue;
        if (ch == '#') {
            flush();
            in_comment = true;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(ch))) {
            flush();
            continue;
        }
        if (cur.empty()) cur_line = line;
        cur.push_back(ch);
    }
    flush();
    return tokens;
}

inline bool is_section_keyword(const std::string& s) {
    return s == "nx" || s == "ny" || s == "x" || s == "y" || s == "z" ||
           s == "t" || s == "alpha" || s == "beta" || s == "gamma" ||
           s == "alpha_matrix" || s == "beta_matrix" || s == "gamma_matrix";
}

inline bool is_number(const std::string& s) {
    char* end = nullptr;
    std::strtod(s.c_str(), &end);
    return end != nullptr && *end == '\0' && !s.empty();
}

inline double parse_number(const Token& tok, const std::string& section) {
    char* end = nullptr;
    const double v = std::strtod(tok.text.c_str(), &end);
    if (end == nullptr || *end != '\0')
        raise(errc::syntax_error,
              "expected a number in section '" + section + "', got '" +
                  tok.text + "' (line " + std::to_string(tok.line) + ")");
    return v;
}

inline std::size_t parse_count(const Token& tok, const std::string& section) {
    char* end = nullptr;
    const long v = std::strtol(tok.text.c_str(), &end, 10);
    if (end == nullptr || *end != '\0' || v < 1)
        raise(errc::syntax_error,
              "section '" + section + "' expects a positive integer, got '" +
                  tok.text + "' (line " + std::to_string(tok.line) + ")");
    return static_cast<std::size_t>(v);
}

}  // namespace detail

/// A dataset parsed from the chfis-v1 text format plus any parameter
/// sections the file carried. Scalar and matrix parameter entries are
/// mutually exclusive within one file.
struct ParsedDataset {
    GeneralizedDataset data;
    std::optional<double> alpha, beta, gamma;
    std::optional<Grid2> alpha_matrix, beta_matrix, gamma_matrix;

    bool has_any_params() const {
        return alpha || beta || gamma || alpha_matrix || beta_matrix ||
               gamma_matrix;
    }
    bool has_matrix_params() const {
        return alpha_matrix.has_value() || beta_matrix.has_value() ||
               gamma_matrix.has_value();
    }
};

/// Parses the chfis-v1 format: a `chfis-v1` magic line, then `nx`/`ny` and
/// the `x`, `y`, `z`, `t` sections in any order, '#' comments, free
/// whitespace. Optional `alpha`/`beta`/`gamma` scalars or `*_matrix`
/// sections carry parameters.
inline ParsedDataset parse_dataset(std::string_view text) {
    using detail::Token;
    const std::vector<Token> tokens = detail::tokenize(text);
    if (tokens.empty())
        raise(errc::syntax_error, "empty input (line 1)");
    if (tokens[0].text != "chfis-v1")
        raise(errc::syntax_error,
              "missing 'chfis-v1' magic (line " +
                  std::to_string(tokens[0].line) + ")");

    // nx/ny first: the other section lengths depend on them.
    std::optional<std::size_t> nx, ny;
    for (std::size_t i = 1; i < tokens.size(); ++i) {
        if (tokens[i].text != "nx" && tokens[i].text != "ny") continue;
        const bool is_x = tokens[i].text == "nx";
        auto& slot = is_x ? nx : ny;
        if (slot)
            raise(errc::syntax_error,
                  "duplicate section '" + tokens[i].text + "' (line " +
                      std::to_string(tokens[i].line) + ")");
        if (i + 1 >= tokens.size())
            raise(errc::syntax_error,
                  "section '" + tokens[i].text + "' is missing its value (line " +
                      std::to_string(tokens[i].line) + ")");
        slot = detail::parse_count(tokens[i + 1], tokens[i].text);
    }
    if (!nx) raise(errc::syntax_error, "missing 'nx' section");
    if (!ny) raise(errc::syntax_error, "missing 'ny' section");
    const std::size_t n_cells = *nx, m_cells = *ny;
    if (n_cells > 100000 / (m_cells + 1))
        raise(errc::syntax_error, "grid of " + std::to_string(n_cells) + "x" +
                                      std::to_string(m_cells) +
                                      " cells is past the format limit");

    std::optional<std::vector<double>> xs, ys, zs, ts;
    std::optional<double> sa, sb, sg;
    std::optional<std::vector<double>> ma, mb, mg;

    auto read_values = [&](std::size_t& i, std::size_t count,
                           const std::string& section) {
        std::vector<double> out;
        out.reserve(count);
        const int at_line = tokens[i].line;
        ++i;
        while (out.size() < count) {
            if (i >= tokens.size() ||
                detail::is_section_keyword(tokens[i].text))
                raise(errc::shape_mismatch,
                      "section '" + section + "' expects " +
                          std::to_string(count) + " values, got " +
                          std::to_string(out.size()) + " (line " +
                          std::to_string(at_line) + ")");
            out.push_back(detail::parse_number(tokens[i], section));
            ++i;
        }
        return out;
    };
    auto store = [&](std::optional<std::vector<double>>& slot,
                     std::size_t& i, std::size_t count,
                     const std::string& section) {
        if (slot)
            raise(errc::syntax_error, "duplicate section '" + section +
                                          "' (line " +
                                          std::to_string(tokens[i].line) + ")");
        slot = read_values(i, count, section);
    };

    std::size_t i = 1;
    while (i < tokens.size()) {
        const std::string& kw = tokens[i].text;
        if (kw == "nx" || kw == "ny") {
            i += 2;  // validated in the first pass
        } else if (kw == "x") {
            store(xs, i, n_cells + 1, "x");
        } else if (kw == "y") {
            store(ys, i, m_cells + 1, "y");
        } else if (kw == "z") {
            store(zs, i, (n_cells + 1) * (m_cells + 1), "z");
        } else if (kw == "t") {
            store(ts, i, (n_cells + 1) * (m_cells + 1), "t");
        } else if (kw == "alpha" || kw == "beta" || kw == "gamma") {
            auto& slot = kw == "alpha" ? sa : (kw == "beta" ? sb : sg);
            if (slot)
                raise(errc::syntax_error,
                      "duplicate section '" + kw + "' (line " +
                          std::to_string(tokens[i].line) + ")");
            if (i + 1 >= tokens.size())
                raise(errc::syntax_error,
                      "section '" + kw + "' is missing its value (line " +
                          std::to_string(tokens[i].line) + ")");
            slot = detail::parse_number(tokens[i + 1], kw);
            i += 2;
        } else if (kw == "alpha_matrix" || kw == "beta_matrix" ||
                   kw == "gamma_matrix") {
            auto& slot = kw == "alpha_matrix" ? ma
                         : (kw == "beta_matrix" ? mb : mg);
            if (slot)
                raise(errc::syntax_error,
                      "duplicate section '" + kw + "' (line " +
                          std::to_string(tokens[i].line) + ")");
            slot = read_values(i, n_cells * m_cells, kw);
        } else if (detail::is_number(kw)) {
            raise(errc::shape_mismatch,
                  "stray value '" + kw + "' after a full section (line " +
                      std::to_string(tokens[i].line) + ")");
        } else {
            raise(errc::syntax_error,
                  "unknown section '" + kw + "' (line " +
                      std::to_string(tokens[i].line) + ")");
        }
    }

    if (!xs) raise(errc::syntax_error, "missing 'x' section");
    if (!ys) raise(errc::syntax_error, "missing 'y' section");
    if (!zs) raise(errc::syntax_error, "missing 'z' section");
    if (!ts) raise(errc::syntax_error, "missing 't' section");
    if ((sa || sb || sg) && (ma || mb || mg))
        raise(errc::syntax_error,
              "scalar and matrix parameter sections cannot be mixed");

    ParsedDataset out{
        GeneralizedDataset::validate(
            std::move(*xs), std::move(*ys),
            Grid2(n_cells + 1, m_cells + 1, std::move(*zs)),
            Grid2(n_cells + 1, m_cells + 1, std::move(*ts))),
        sa, sb, sg, std::nullopt, std::nullopt, std::nullopt};
    if (ma) out.alpha_matrix = Grid2(n_cells, m_cells, std::move(*ma));
    if (mb) out.beta_matrix = Grid2(n_cells, m_cells, std::move(*mb));
    if (mg) out.gamma_matrix = Grid2(n_cells, m_cells, std::move(*mg));
    return out;
}

/// Serializes a dataset (and optionally its parameters) in chfis-v1 form.
/// parse(write(d)) reproduces d exactly.
inline std::string write_dataset(const GeneralizedDataset& d,
                                 const IfsParameters* params = nullptr) {
    std::ostringstream os;
    os << "chfis-v1\n";
    os << "nx " << d.cells_x() << "\n";
    os << "ny " << d.cells_y() << "\n";
    os << "x";
    for (double v : d.x) os << " " << detail::fmt17(v);
    os << "\ny";
    for (double v : d.y) os << " " << detail::fmt17(v);
    os << "\n";
    auto write_matrix = [&](const char* name, const Grid2& g) {
        os << name << "\n";
        for (std::size_t i = 0; i < g.rows; ++i) {
            for (std::size_t j = 0; j < g.cols; ++j)
                os << (j ? " " : "") << detail::fmt17(g.at(i, j));
            os << "\n";
        }
    };
    write_matrix("z", d.z);
    write_matrix("t", d.t);
    if (params != nullptr) {
        if (params->is_uniform()) {
            os << "alpha " << detail::fmt17(params->alpha.v.front()) << "\n";
            os << "beta " << detail::fmt17(params->beta.v.front()) << "\n";
            os << "gamma " << detail::fmt17(params->gamma.v.front()) << "\n";
        } else {
            write_matrix("alpha_matrix", params->alpha);
            write_matrix("beta_matrix", params->beta);
            write_matrix("gamma_matrix", params->gamma);
        }
    }
    return os.str();
}

/// CSV export: header then one row per sample, x-major then y, 17
/// significant digits. Byte-identical for identical grids.
inline std::string write_grid_csv(const SurfaceGrid& grid) {
    std::ostringstream os;
    os << "x,y,f1,f2\n";
    for (std::size_t i = 0; i < grid.xs.size(); ++i)
        for (std::size_t j = 0; j < grid.ys.size(); ++j)
            os << detail::fmt17(grid.xs[i]) << "," << detail::fmt17(grid.ys[j])
               << "," << detail::fmt17(grid.f1.at(i, j)) << ","
               << detail::fmt17(grid.f2.at(i, j)) << "\n";
    return os.str();
}

/// Rebuilds a grid from its CSV serialization. The parsed grid carries no
/// refinement depth (CSV does not record it).
inline SurfaceGrid parse_grid_csv(std::string_view text) {
    std::istringstream is{std::string(text)};
    std::string line;
    if (!std::getline(is, line) || line != "x,y,f1,f2")
        raise(errc::syntax_error, "grid CSV must start with 'x,y,f1,f2'");
    std::vector<std::array<double, 4>> rows;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::array<double, 4> row{};
        const char* p = line.c_str();
        for (int c = 0; c < 4; ++c) {
            char* end = nullptr;
            row[c] = std::strtod(p, &end);
            if (end == p)
                raise(errc::syntax_error,
                      "bad number in grid CSV (line " + std::to_string(lineno) + ")");
            p = end;
            if (c < 3) {
                if (*p != ',')
                    raise(errc::syntax_error,
                          "expected ',' in grid CSV (line " +
                              std::to_string(lineno) + ")");
                ++p;
            }
        }
        if (*p != '\0' && *p != '\r')
            raise(errc::syntax_error,
                  "trailing characters in grid CSV (line " +
                      std::to_string(lineno) + ")");
        rows.push_back(row);
    }
    if (rows.empty()) raise(errc::syntax_error, "grid CSV has no data rows");

    SurfaceGrid grid;
    for (const auto& r : rows) {
        if (r[0] != rows[0][0]) break;  // first x block defines the y axis
        grid.ys.push_back(r[1]);
    }
    const std::size_t py = grid.ys.size();
    if (py == 0 || rows.size() % py != 0)
        raise(errc::syntax_error, "grid CSV rows do not form a full lattice");
    const std::size_t px = rows.size() / py;
    grid.xs.resize(px);
    grid.f1 = Grid2(px, py);
    grid.f2 = Grid2(px, py);
    for (std::size_t i = 0; i < px; ++i) {
        grid.xs[i] = rows[i * py][0];
        for (std::size_t j = 0; j < py; ++j) {
            const auto& r = rows[i * py + j];
            if (r[0] != grid.xs[i] || r[1] != grid.ys[j])
                raise(errc::syntax_error,
                      "grid CSV rows are not sorted x-major (row " +
                          std::to_string(i * py + j + 1) + ")");
            grid.f1.at(i, j) = r[2];
            grid.f2.at(i, j) = r[3];
        }
    }
    return grid;
}

/// ASCII PGM heightmap of f1: width = |xs|, height = |ys|, larger y up,
/// values normalized to 0..255 (all zero for a constant surface), halves
/// rounded away from zero.
inline std::string write_heightmap_pgm(const SurfaceGrid& grid) {
    const std::size_t w = grid.xs.size(), h = grid.ys.size();
    double lo = grid.f1.v.front(), hi = lo;
    for (double v : grid.f1.v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double range = hi - lo;
    std::ostringstream os;
    os << "P2\n" << w << " " << h << "\n255\n";
    for (std::size_t k = 0; k < h; ++k) {
        const std::size_t j = h - 1 - k;
        for (std::size_t i = 0; i < w; ++i) {
            long pix = 0;
            if (range > 0.0)
                pix = std::lround((grid.f1.at(i, j) - lo) / range * 255.0);
            os << (i ? " " : "") << pix;
        }
        os << "\n";
    }
    return os.str();
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(errc::syntax_error, "cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void write_text_file(const std::string& path,
                            const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(errc::syntax_error, "cannot write '" + path + "'");
    out << content;
}

inline ParsedDataset load_dataset(const std::string& path) {
    return parse_dataset(read_text_file(path));
}

}  // namespace chfis
