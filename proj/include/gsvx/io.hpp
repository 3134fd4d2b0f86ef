#pragma once

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gsvx/experiments.hpp"

namespace gsvx {

/// Labeled numeric table, e.g. gene expression rows by sample columns.
struct Dataset {
    std::string id;
    std::vector<std::string> row_labels;
    RealMatrix values;
};

enum class ReportFormat { Json, Csv, Text };

struct RunConfig {
    Method method = Method::TwoVarBidiag;
    NewtonConfig newton;
    double svd_tol = 1e-12;
    Index max_k = 0;
    double rank_tol = 1e-12;
    std::uint64_t seed = 0;
    ReportFormat output_format = ReportFormat::Json;
};

// ---------------------------------------------------------------------------
// number formatting: 17 significant digits, round-trip safe for doubles

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_double(std::string_view text, Index row, Index col) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end != begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw ParseError("malformed numeric cell at row " + std::to_string(row + 1) +
                         ", column " + std::to_string(col + 1) + ": '" + std::string(text) + "'");
    if (!std::isfinite(value))
        throw NonFinite("non-finite value at row " + std::to_string(row + 1) + ", column " +
                        std::to_string(col + 1));
    return value;
}

// ---------------------------------------------------------------------------
// csv

namespace detail {

/// RFC-4180-style row splitter: quoted fields, doubled-quote escapes, and
/// CR/LF/CRLF line ends.
inline std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool any = false;

    const auto end_field = [&]() {
        row.push_back(std::move(field));
        field.clear();
    };
    const auto end_row = [&]() {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
    };

    char c = 0;
    while (in.get(c)) {
        any = true;
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field.push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!field.empty())
                    throw ParseError("stray quote inside unquoted field at row " +
                                     std::to_string(rows.size() + 1));
                quoted = true;
                break;
            case ',': end_field(); break;
            case '\r':
                if (in.peek() == '\n') in.get(c);
                end_row();
                break;
            case '\n': end_row(); break;
            default: field.push_back(c);
        }
    }
    if (quoted) throw ParseError("unterminated quoted field");
    if (!field.empty() || !row.empty()) end_row();
    if (!any) throw ParseError("empty input");
    return rows;
}

inline std::vector<std::vector<std::string>> parse_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return parse_csv(in);
}

inline std::string file_stem(const std::string& path) {
    const std::size_t slash = path.find_last_of("/\\");
    std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
    const std::size_t dot = name.find_last_of('.');
    if (dot != std::string::npos && dot > 0) name = name.substr(0, dot);
    return name;
}

}  // namespace detail

/// Plain all-numeric csv.
inline RealMatrix read_matrix(std::istream& in) {
    const auto rows = detail::parse_csv(in);
    const Index r = static_cast<Index>(rows.size());
    const Index c = static_cast<Index>(rows.front().size());
    RealMatrix out(r, c);
    for (Index i = 0; i < r; ++i) {
        const auto& cells = rows[static_cast<std::size_t>(i)];
        if (static_cast<Index>(cells.size()) != c)
            throw ParseError("row " + std::to_string(i + 1) + " has " +
                             std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(c));
        for (Index j = 0; j < c; ++j)
            out(i, j) = parse_double(cells[static_cast<std::size_t>(j)], i, j);
    }
    return out;
}

inline RealMatrix read_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return read_matrix(in);
}

/// Labeled csv: a header row, first column holding row labels, all remaining
/// cells numeric.
inline Dataset read_labeled_csv(std::istream& in, std::string id) {
    const auto rows = detail::parse_csv(in);
    if (rows.size() < 2) throw ParseError("labeled csv needs a header and at least one row");
    const Index c = static_cast<Index>(rows.front().size()) - 1;
    if (c < 1) throw ParseError("labeled csv needs at least one value column");

    Dataset ds;
    ds.id = std::move(id);
    const Index r = static_cast<Index>(rows.size()) - 1;
    ds.values.resize(r, c);
    for (Index i = 0; i < r; ++i) {
        const auto& cells = rows[static_cast<std::size_t>(i + 1)];
        if (static_cast<Index>(cells.size()) != c + 1)
            throw ParseError("row " + std::to_string(i + 2) + " has " +
                             std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(c + 1));
        ds.row_labels.push_back(cells.front());
        for (Index j = 0; j < c; ++j)
            ds.values(i, j) = parse_double(cells[static_cast<std::size_t>(j + 1)], i + 1, j + 1);
    }
    return ds;
}

inline Dataset read_labeled_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return read_labeled_csv(in, detail::file_stem(path));
}

/// Complex variant: consecutive (real, imaginary) column pairs.
inline Matrix read_complex_matrix(std::istream& in) {
    const RealMatrix raw = read_matrix(in);
    if (raw.cols() % 2 != 0)
        throw ParseError("complex csv needs an even column count (re/im pairs)");
    Matrix out(raw.rows(), raw.cols() / 2);
    for (Index j = 0; j < out.cols(); ++j)
        for (Index i = 0; i < out.rows(); ++i)
            out(i, j) = Complex(raw(i, 2 * j), raw(i, 2 * j + 1));
    return out;
}

inline Matrix read_complex_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return read_complex_matrix(in);
}

inline void write_matrix(std::ostream& out, const RealMatrix& mat) {
    for (Index i = 0; i < mat.rows(); ++i) {
        for (Index j = 0; j < mat.cols(); ++j) {
            if (j > 0) out << ',';
            out << format_double(mat(i, j));
        }
        out << '\n';
    }
}

inline void write_matrix(const std::string& path, const RealMatrix& mat) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_matrix(out, mat);
    if (!out.good()) throw IoError("failed writing '" + path + "'");
}

inline void write_complex_matrix(std::ostream& out, const Matrix& mat) {
    for (Index i = 0; i < mat.rows(); ++i) {
        for (Index j = 0; j < mat.cols(); ++j) {
            if (j > 0) out << ',';
            out << format_double(mat(i, j).real()) << ',' << format_double(mat(i, j).imag());
        }
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// json emission (hand-rolled: fixed schemas, deterministic key order, and the
// 17-significant-digit number policy; vendor json is used for parsing only)

namespace detail {

inline std::string json_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (const char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out.push_back(c);
                }
        }
    }
    return out;
}

inline std::string json_pairs(const std::vector<std::pair<Index, GsvPair>>& pairs) {
    std::string out = "[";
    bool first = true;
    for (const auto& [i, gp] : pairs) {
        if (!first) out += ",";
        first = false;
        out += "{\"index\":" + std::to_string(i) + ",\"alpha\":" + format_double(gp.alpha) +
               ",\"beta\":" + format_double(gp.beta) + "}";
    }
    return out + "]";
}

inline std::string json_theta(const std::vector<std::pair<Index, double>>& theta) {
    std::string out = "[";
    bool first = true;
    for (const auto& [i, th] : theta) {
        if (!first) out += ",";
        first = false;
        out += "{\"index\":" + std::to_string(i) + ",\"theta\":" + format_double(th) + "}";
    }
    return out + "]";
}

inline std::string json_error_report(const ErrorReport& rep) {
    return std::string("{\"sizes\":[") + std::to_string(rep.sizes[0]) + "," +
           std::to_string(rep.sizes[1]) + "," + std::to_string(rep.sizes[2]) +
           "],\"method\":\"" + method_name(rep.method) + "\",\"err1\":" +
           format_double(rep.err1) + ",\"err2\":" + format_double(rep.err2) +
           ",\"err3\":" + format_double(rep.err3) + ",\"err4\":" + format_double(rep.err4) +
           ",\"wall_time_s\":" + format_double(rep.wall_time_s) + "}";
}

inline std::string json_sweep(const SweepResult& res) {
    std::string out = "{\"pairs\":" + json_pairs(res.computed) +
                      ",\"theta\":" + json_theta(res.theta) + ",\"crossing_index\":";
    out += res.crossing_index ? std::to_string(*res.crossing_index) : std::string("null");
    return out + "}";
}

inline std::string json_comparison_side(const DatasetComparison& cmp) {
    std::string out = "{\"id\":\"" + json_escape(cmp.id) + "\",\"pairs\":" +
                      json_pairs(cmp.pairs) + ",\"theta\":" + json_theta(cmp.theta) +
                      ",\"crossing_index\":";
    out += cmp.equal_significance_index ? std::to_string(*cmp.equal_significance_index)
                                        : std::string("null");
    return out + "}";
}

}  // namespace detail

inline void write_report(const std::vector<ErrorReport>& reports, ReportFormat format,
                         std::ostream& out) {
    switch (format) {
        case ReportFormat::Json: {
            out << "[";
            for (std::size_t j = 0; j < reports.size(); ++j) {
                if (j > 0) out << ",";
                out << detail::json_error_report(reports[j]);
            }
            out << "]\n";
            break;
        }
        case ReportFormat::Csv: {
            out << "m,p,n,method,err1,err2,err3,err4,wall_time_s\n";
            for (const auto& rep : reports) {
                out << rep.sizes[0] << ',' << rep.sizes[1] << ',' << rep.sizes[2] << ','
                    << method_name(rep.method) << ',' << format_double(rep.err1) << ','
                    << format_double(rep.err2) << ',' << format_double(rep.err3) << ','
                    << format_double(rep.err4) << ',' << format_double(rep.wall_time_s) << '\n';
            }
            break;
        }
        case ReportFormat::Text: {
            out << "   (m, p, n)        method        err1        err2        err3        err4     time[s]\n";
            char line[256];
            for (const auto& rep : reports) {
                std::snprintf(line, sizeof(line),
                              "%5lld %5lld %5lld %13s %11.2e %11.2e %11.2e %11.2e %11.2f\n",
                              static_cast<long long>(rep.sizes[0]),
                              static_cast<long long>(rep.sizes[1]),
                              static_cast<long long>(rep.sizes[2]), method_name(rep.method),
                              rep.err1, rep.err2, rep.err3, rep.err4, rep.wall_time_s);
                out << line;
            }
            break;
        }
    }
}

inline void write_report(const SweepResult& res, ReportFormat format, std::ostream& out) {
    switch (format) {
        case ReportFormat::Json: out << detail::json_sweep(res) << "\n"; break;
        case ReportFormat::Csv: {
            out << "index,alpha,beta,theta,crossing\n";
            for (std::size_t j = 0; j < res.computed.size(); ++j) {
                const auto& [i, gp] = res.computed[j];
                const bool star = res.crossing_index && *res.crossing_index == i;
                out << i << ',' << format_double(gp.alpha) << ',' << format_double(gp.beta)
                    << ',' << format_double(res.theta[j].second) << ',' << (star ? "*" : "")
                    << '\n';
            }
            break;
        }
        case ReportFormat::Text: {
            out << "index        alpha                beta                theta\n";
            for (std::size_t j = 0; j < res.computed.size(); ++j) {
                const auto& [i, gp] = res.computed[j];
                char line[160];
                std::snprintf(line, sizeof(line), "%5lld %20.15f %19.15f %20.15f %s\n",
                              static_cast<long long>(i), gp.alpha, gp.beta,
                              res.theta[j].second,
                              res.crossing_index && *res.crossing_index == i ? "*" : "");
                out << line;
            }
            break;
        }
    }
}

inline void write_report(const ComparisonReport& rep, ReportFormat format, std::ostream& out) {
    switch (format) {
        case ReportFormat::Json:
            out << "{\"datasets\":[" << detail::json_comparison_side(rep.first) << ","
                << detail::json_comparison_side(rep.second) << "]}\n";
            break;
        case ReportFormat::Csv: {
            out << "dataset,index,alpha,beta,theta,crossing\n";
            for (const auto* cmp : {&rep.first, &rep.second}) {
                for (std::size_t j = 0; j < cmp->pairs.size(); ++j) {
                    const auto& [i, gp] = cmp->pairs[j];
                    const bool star =
                        cmp->equal_significance_index && *cmp->equal_significance_index == i;
                    out << cmp->id << ',' << i << ',' << format_double(gp.alpha) << ','
                        << format_double(gp.beta) << ',' << format_double(cmp->theta[j].second)
                        << ',' << (star ? "*" : "") << '\n';
                }
            }
            break;
        }
        case ReportFormat::Text: {
            for (const auto* cmp : {&rep.first, &rep.second}) {
                out << "dataset " << cmp->id;
                if (cmp->equal_significance_index)
                    out << " (equal significance at index " << *cmp->equal_significance_index
                        << ")";
                out << "\n";
                SweepResult view;
                view.computed = cmp->pairs;
                view.theta = cmp->theta;
                view.crossing_index = cmp->equal_significance_index;
                write_report(view, ReportFormat::Text, out);
            }
            break;
        }
    }
}

inline void write_report(const GsvSpectrum& spec, ReportFormat format, std::ostream& out) {
    switch (format) {
        case ReportFormat::Json: {
            std::vector<std::pair<Index, GsvPair>> pairs;
            for (const auto& gp : spec.pairs) pairs.emplace_back(gp.index, gp);
            out << "{\"pairs\":" << detail::json_pairs(pairs) << ",\"r\":" << spec.r
                << ",\"s\":" << spec.s << "}\n";
            break;
        }
        case ReportFormat::Csv: {
            out << "index,alpha,beta\n";
            for (const auto& gp : spec.pairs)
                out << gp.index << ',' << format_double(gp.alpha) << ','
                    << format_double(gp.beta) << '\n';
            break;
        }
        case ReportFormat::Text: {
            out << "index        alpha                beta\n";
            for (const auto& gp : spec.pairs) {
                char line[128];
                std::snprintf(line, sizeof(line), "%5lld %20.15f %19.15f\n",
                              static_cast<long long>(gp.index), gp.alpha, gp.beta);
                out << line;
            }
            break;
        }
    }
}

template <typename Report>
void write_report(const Report& rep, ReportFormat format, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_report(rep, format, out);
    if (!out.good()) throw IoError("failed writing '" + path + "'");
}

}  // namespace gsvx
