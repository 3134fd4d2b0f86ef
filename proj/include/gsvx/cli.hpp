#pragma once

#include <CLI11.hpp>

#include "gsvx/io.hpp"

namespace gsvx {

namespace detail {

inline Method parse_method(const std::string& name) {
    if (name == "one-var") return Method::OneVarNewton;
    if (name == "two-var") return Method::TwoVarBidiag;
    if (name == "oracle") return Method::DenseOracle;
    throw CLI::ValidationError("--method", "unknown method '" + name + "'");
}

inline ReportFormat parse_format(const std::string& name) {
    if (name == "json") return ReportFormat::Json;
    if (name == "csv") return ReportFormat::Csv;
    if (name == "text") return ReportFormat::Text;
    throw CLI::ValidationError("--format", "unknown format '" + name + "'");
}

// "100x80x20,200x180x40"
inline std::vector<std::array<Index, 3>> parse_sizes(const std::string& text) {
    std::vector<std::array<Index, 3>> sizes;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::array<Index, 3> dims{};
        std::stringstream entry(item);
        std::string part;
        int got = 0;
        while (std::getline(entry, part, 'x')) {
            if (got >= 3) break;
            dims[static_cast<std::size_t>(got++)] = std::strtoll(part.c_str(), nullptr, 10);
        }
        if (got != 3 || dims[0] < 1 || dims[1] < 1 || dims[2] < 1)
            throw CLI::ValidationError("--sizes", "expected mxpxn entries, got '" + item + "'");
        sizes.push_back(dims);
    }
    return sizes;
}

/// Plain numeric csv, labeled csv (auto-detected via the first header cell),
/// or re/im-paired csv when `complex_pairs` is set.
inline Matrix load_matrix(const std::string& path, bool complex_pairs) {
    if (complex_pairs) return read_complex_matrix(path);
    const auto rows = parse_csv_file(path);
    bool labeled = false;
    if (!rows.front().empty()) {
        const std::string& head = rows.front().front();
        double ignored = 0.0;
        const auto [ptr, ec] =
            std::from_chars(head.data(), head.data() + head.size(), ignored);
        labeled = ec != std::errc() || ptr != head.data() + head.size();
    }
    if (labeled) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open '" + path + "' for reading");
        return read_labeled_csv(in, file_stem(path)).values.cast<Complex>();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return read_matrix(in).cast<Complex>();
}

template <typename Report>
void emit(const Report& rep, ReportFormat format, const std::string& out_path) {
    if (out_path.empty()) write_report(rep, format, std::cout);
    else write_report(rep, format, out_path);
}

}  // namespace detail

/// Command-line driver. Exit codes: 0 success, 1 usage error, 2 numerical or
/// I/O failure (the originating error name is printed to stderr).
inline int cli_main(const std::vector<std::string>& args) {
    CLI::App app{"partial generalized singular values of a matrix pair"};
    app.require_subcommand(1);

    std::uint64_t default_seed = 0;
    if (const char* env = std::getenv("GSVX_SEED")) {
        const std::string text(env);
        const auto [ptr, ec] =
            std::from_chars(text.data(), text.data() + text.size(), default_seed);
        if (ec != std::errc() || ptr != text.data() + text.size()) {
            std::cerr << "invalid GSVX_SEED value '" << text << "'\n";
            return 1;
        }
    }

    // shared options
    std::string method_name_opt = "two-var";
    std::string format_name = "json";
    std::string out_path;
    std::uint64_t seed = default_seed;
    double svd_tol = 1e-12;
    double grad_tol = 1e-6;
    Index max_k = 0;
    double rank_tol = 1e-12;
    bool complex_pairs = false;
    bool json_flag = false;

    const auto add_common = [&](CLI::App* cmd, bool with_method) {
        if (with_method)
            cmd->add_option("--method", method_name_opt, "one-var | two-var | oracle");
        cmd->add_option("--seed", seed, "random seed (default from GSVX_SEED)");
        cmd->add_option("--svd-tol", svd_tol, "residual tolerance of the partial SVD");
        cmd->add_option("--grad-tol", grad_tol, "gradient tolerance of the Newton solver");
        cmd->add_option("--max-k", max_k, "largest Krylov size (0 = automatic)");
        cmd->add_option("--rank-tol", rank_tol, "full-rank validation tolerance");
        cmd->add_flag("--complex", complex_pairs, "read matrices as re/im column pairs");
    };

    // gen
    auto* gen = app.add_subcommand("gen", "generate a random pair with known spectrum");
    Index gen_m = 0, gen_p = 0, gen_n = 0;
    std::string out_a, out_b, out_truth;
    gen->add_option("--m", gen_m, "rows of A")->required();
    gen->add_option("--p", gen_p, "rows of B")->required();
    gen->add_option("--n", gen_n, "columns")->required();
    gen->add_option("--seed", seed, "random seed");
    gen->add_option("--out-a", out_a, "output csv for A")->required();
    gen->add_option("--out-b", out_b, "output csv for B")->required();
    gen->add_option("--out-truth", out_truth, "output csv for the planted values")->required();

    // gsv
    auto* gsv = app.add_subcommand("gsv", "one generalized singular value");
    std::string path_a, path_b;
    Index index = 0;
    gsv->add_option("--a", path_a, "csv for A")->required();
    gsv->add_option("--b", path_b, "csv for B")->required();
    gsv->add_option("--index", index, "1-based index")->required()->check(CLI::PositiveNumber);
    gsv->add_flag("--json", json_flag, "emit a json object");
    add_common(gsv, true);

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "partial spectrum march with theta profile");
    sweep_cmd->add_option("--a", path_a, "csv for A")->required();
    sweep_cmd->add_option("--b", path_b, "csv for B")->required();
    sweep_cmd->add_option("--format", format_name, "json | csv | text");
    sweep_cmd->add_option("--out", out_path, "output path (default stdout)");
    add_common(sweep_cmd, true);

    // analyze
    auto* analyze = app.add_subcommand("analyze", "two-dataset comparison report");
    std::string path_a1, path_b1, path_a2, path_b2;
    analyze->add_option("--a1", path_a1, "csv for the first dataset's A")->required();
    analyze->add_option("--b1", path_b1, "csv for the first dataset's B")->required();
    analyze->add_option("--a2", path_a2, "csv for the second dataset's A")->required();
    analyze->add_option("--b2", path_b2, "csv for the second dataset's B")->required();
    analyze->add_option("--format", format_name, "json | csv | text");
    analyze->add_option("--out", out_path, "output path (default stdout)");
    add_common(analyze, true);

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "planted-truth benchmark protocol");
    std::string sizes_text = "100x80x20";
    std::string methods_text = "one-var,two-var";
    int jobs = 1;
    bench_cmd->add_option("--sizes", sizes_text, "comma list of mxpxn");
    bench_cmd->add_option("--methods", methods_text, "comma list of methods");
    bench_cmd->add_option("--jobs", jobs, "parallel entries")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--format", format_name, "json | csv | text");
    bench_cmd->add_option("--out", out_path, "output path (default stdout)");
    add_common(bench_cmd, true);

    // oracle
    auto* oracle_cmd = app.add_subcommand("oracle", "dense spectrum dump");
    oracle_cmd->add_option("--a", path_a, "csv for A")->required();
    oracle_cmd->add_option("--b", path_b, "csv for B")->required();
    oracle_cmd->add_option("--format", format_name, "json | csv | text");
    oracle_cmd->add_option("--out", out_path, "output path (default stdout)");
    add_common(oracle_cmd, false);

    // CLI11 wants argv-style reversed input when parsing from a vector.
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        NewtonConfig newton;
        newton.grad_tol = grad_tol;
        newton.seed = seed;
        const ReportFormat format = detail::parse_format(format_name);

        if (gen->parsed()) {
            const PlantedGmp planted = generate_random_gmp(gen_m, gen_p, gen_n, seed);
            write_matrix(out_a, planted.pair.a.real());
            write_matrix(out_b, planted.pair.b.real());
            RealMatrix truth(gen_n, 2);
            truth.col(0) = planted.alpha_star;
            truth.col(1) = planted.beta_star;
            std::ofstream out(out_truth, std::ios::binary);
            if (!out) throw IoError("cannot open '" + out_truth + "' for writing");
            out << "alpha,beta\n";
            for (Index i = 0; i < gen_n; ++i)
                out << format_double(truth(i, 0)) << ',' << format_double(truth(i, 1)) << '\n';
            if (!out.good()) throw IoError("failed writing '" + out_truth + "'");
            return 0;
        }

        if (gsv->parsed()) {
            const Method method = detail::parse_method(method_name_opt);
            const GrassmanPair pair =
                validate_gmp(detail::load_matrix(path_a, complex_pairs),
                             detail::load_matrix(path_b, complex_pairs), rank_tol);
            const GsvPair gp =
                dispatch(SolveRequest{pair, index, method, newton, svd_tol, max_k});
            if (json_flag) {
                std::cout << "{\"index\":" << gp.index << ",\"alpha\":" << format_double(gp.alpha)
                          << ",\"beta\":" << format_double(gp.beta) << ",\"method\":\""
                          << method_name(method) << "\"}\n";
            } else {
                std::cout << "alpha = " << format_double(gp.alpha) << "\n"
                          << "beta  = " << format_double(gp.beta) << "\n";
            }
            return 0;
        }

        if (sweep_cmd->parsed()) {
            const GrassmanPair pair =
                validate_gmp(detail::load_matrix(path_a, complex_pairs),
                             detail::load_matrix(path_b, complex_pairs), rank_tol);
            SweepConfig cfg;
            cfg.method = detail::parse_method(method_name_opt);
            cfg.newton = newton;
            cfg.svd_tol = svd_tol;
            cfg.max_k = max_k;
            detail::emit(sweep(pair, cfg), format, out_path);
            return 0;
        }

        if (analyze->parsed()) {
            const GrassmanPair ds1 =
                validate_gmp(detail::load_matrix(path_a1, complex_pairs),
                             detail::load_matrix(path_b1, complex_pairs), rank_tol);
            const GrassmanPair ds2 =
                validate_gmp(detail::load_matrix(path_a2, complex_pairs),
                             detail::load_matrix(path_b2, complex_pairs), rank_tol);
            SweepConfig cfg;
            cfg.method = detail::parse_method(method_name_opt);
            cfg.newton = newton;
            cfg.svd_tol = svd_tol;
            cfg.max_k = max_k;
            detail::emit(compare_datasets(ds1, ds2, cfg, detail::file_stem(path_a1),
                                          detail::file_stem(path_a2)),
                         format, out_path);
            return 0;
        }

        if (bench_cmd->parsed()) {
            const auto sizes = detail::parse_sizes(sizes_text);
            std::vector<Method> methods;
            std::stringstream ss(methods_text);
            std::string item;
            while (std::getline(ss, item, ',')) methods.push_back(detail::parse_method(item));
            detail::emit(benchmark(sizes, methods, seed, newton, svd_tol, max_k, jobs), format,
                         out_path);
            return 0;
        }

        if (oracle_cmd->parsed()) {
            const GrassmanPair pair =
                validate_gmp(detail::load_matrix(path_a, complex_pairs),
                             detail::load_matrix(path_b, complex_pairs), rank_tol);
            detail::emit(dense_gsv_oracle(pair), format, out_path);
            return 0;
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << e.name() << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

inline int cli_main(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return cli_main(args);
}

}  // namespace gsvx
