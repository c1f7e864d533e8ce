// hmdc command-line tool: compress weight matrices/cells into HMD, LMF, or
// CSR containers, verify containers against their dense reconstruction, and
// run the matvec/cell benchmark sweeps.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hmdc/hmdc.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitFormat = 3;

struct Preset {
    const char* name;
    std::size_t input_dim;
    std::size_t hidden_dim;
};

constexpr Preset kPresets[] = {
    {"har1", 77, 179},
    {"har2", 113, 128},
    {"ptb", 200, 200},
};

const Preset& find_preset(const std::string& name) {
    for (const Preset& p : kPresets) {
        if (name == p.name) return p;
    }
    throw hmdc::ParameterError("unknown preset: " + name);
}

std::pair<std::size_t, std::size_t> parse_dims(const std::string& dims) {
    const std::size_t x = dims.find('x');
    if (x == std::string::npos || x == 0 || x + 1 >= dims.size()) {
        throw hmdc::ParameterError("bad dims, expected MxN: " + dims);
    }
    return {static_cast<std::size_t>(std::stoull(dims.substr(0, x))),
            static_cast<std::size_t>(std::stoull(dims.substr(x + 1)))};
}

std::vector<hmdc::Scheme> parse_schemes(const std::vector<std::string>& names) {
    std::vector<hmdc::Scheme> out;
    for (const std::string& s : names) {
        out.push_back(hmdc::scheme_from_name(s));
    }
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw hmdc::ParameterError("cannot open for write: " + path);
    }
    out << text;
}

// Max |entry| of a matrix, the scale for the oracle tolerance.
double max_abs(const hmdc::DenseMatrix& a) {
    double m = 0.0;
    for (double v : a.data()) m = std::max(m, std::abs(v));
    return m;
}

int run_compress(const std::string& in, const std::string& scheme_str, double factor,
                 const std::string& out, std::uint64_t seed) {
    const hmdc::Scheme scheme = hmdc::scheme_from_name(scheme_str);
    if (in.rfind("random:", 0) == 0) {
        const auto [m, n] = parse_dims(in.substr(7));
        const hmdc::DenseMatrix a = hmdc::random_dense(m, n, seed);
        const hmdc::WeightOperator op = hmdc::compress_dense(a, scheme, factor);
        hmdc::save_container(out, op);
        std::printf("compressed random %zux%zu -> %s (%s, params %zu, achieved %.4f)\n", m, n,
                    out.c_str(), scheme_str.c_str(), op.param_count(),
                    static_cast<double>(m * n) / static_cast<double>(op.param_count()));
        return kExitOk;
    }
    if (in.rfind("random-cell:", 0) == 0) {
        const auto [in_dim, hd] = parse_dims(in.substr(12));
        const hmdc::LstmCell cell(in_dim, hd,
                                  hmdc::WeightOperator(hmdc::random_dense(4 * hd, in_dim, seed)),
                                  hmdc::WeightOperator(hmdc::random_dense(4 * hd, hd, seed + 1)),
                                  hmdc::random_vector(4 * hd, seed + 2));
        const hmdc::LstmCell compressed = hmdc::compress_cell(cell, scheme, factor);
        hmdc::save_container(out, compressed);
        const std::size_t before = hmdc::cell_param_count(cell).weight_params;
        const std::size_t after = hmdc::cell_param_count(compressed).weight_params;
        std::printf(
            "compressed random cell %zu->%zu -> %s (%s, weight params %zu -> %zu, achieved "
            "%.4f)\n",
            in_dim, hd, out.c_str(), scheme_str.c_str(), before, after,
            static_cast<double>(before) / static_cast<double>(after));
        return kExitOk;
    }

    const hmdc::ContainerPayload payload = hmdc::load_container(in);
    if (std::holds_alternative<hmdc::WeightOperator>(payload)) {
        const hmdc::DenseMatrix a = std::get<hmdc::WeightOperator>(payload).densify();
        const hmdc::WeightOperator op = hmdc::compress_dense(a, scheme, factor);
        hmdc::save_container(out, op);
        std::printf("compressed %s -> %s (%s, params %zu, achieved %.4f)\n", in.c_str(),
                    out.c_str(), scheme_str.c_str(), op.param_count(),
                    static_cast<double>(a.rows() * a.cols()) /
                        static_cast<double>(op.param_count()));
        return kExitOk;
    }

    const hmdc::LstmCell& cell = std::get<hmdc::LstmCell>(payload);
    const hmdc::LstmCell compressed = hmdc::compress_cell(cell, scheme, factor);
    hmdc::save_container(out, compressed);
    const std::size_t before = hmdc::cell_param_count(cell).weight_params;
    const std::size_t after = hmdc::cell_param_count(compressed).weight_params;
    std::printf("compressed cell %s -> %s (%s, weight params %zu -> %zu, achieved %.4f)\n",
                in.c_str(), out.c_str(), scheme_str.c_str(), before, after,
                static_cast<double>(before) / static_cast<double>(after));
    return kExitOk;
}

int check_operator(const hmdc::WeightOperator& op, bool oracle) {
    std::printf("kind %s, %zux%zu, params %zu, macs %zu\n", hmdc::scheme_name(op.kind()),
                op.out_dim(), op.in_dim(), op.param_count(), op.mac_count());
    if (!oracle) return kExitOk;

    const hmdc::DenseMatrix dense = op.densify();
    const double tol = 1e-12 * static_cast<double>(op.in_dim()) * std::max(1.0, max_abs(dense));
    double worst = 0.0;
    for (std::uint64_t trial = 0; trial < 8; ++trial) {
        const hmdc::RealVector x = hmdc::random_vector(op.in_dim(), 0xC0FFEE + trial);
        const hmdc::RealVector fast = op.matvec(x);
        const hmdc::RealVector ref = hmdc::dense_matvec(dense, x);
        for (std::size_t i = 0; i < fast.len(); ++i) {
            worst = std::max(worst, std::abs(fast[i] - ref[i]));
        }
    }
    std::printf("oracle max |fast - dense| = %.3e (tolerance %.3e): %s\n", worst, tol,
                worst <= tol ? "OK" : "MISMATCH");
    return worst <= tol ? kExitOk : kExitFormat;
}

int check_cell(const hmdc::LstmCell& cell, bool oracle) {
    std::printf("kind lstm_cell, input %zu, hidden %zu, w_x %s, w_h %s, params %zu\n",
                cell.input_dim(), cell.hidden_dim(), hmdc::scheme_name(cell.w_x().kind()),
                hmdc::scheme_name(cell.w_h().kind()), hmdc::cell_param_count(cell).total());
    if (!oracle) return kExitOk;

    const hmdc::LstmCell twin(cell.input_dim(), cell.hidden_dim(),
                              hmdc::WeightOperator(cell.w_x().densify()),
                              hmdc::WeightOperator(cell.w_h().densify()), cell.bias());
    std::vector<hmdc::RealVector> sequence;
    for (std::uint64_t t = 0; t < 16; ++t) {
        sequence.push_back(hmdc::random_vector(cell.input_dim(), 0xBEEF + t));
    }
    const auto fast = hmdc::lstm_forward(cell, sequence, hmdc::lstm_zero_state(cell));
    const auto ref = hmdc::lstm_forward(twin, sequence, hmdc::lstm_zero_state(twin));
    double worst = 0.0;
    for (std::size_t t = 0; t < fast.size(); ++t) {
        for (std::size_t j = 0; j < cell.hidden_dim(); ++j) {
            worst = std::max(worst, std::abs(fast[t].h[j] - ref[t].h[j]));
        }
    }
    std::printf("oracle max per-step |dh| over 16 steps = %.3e (tolerance 1e-10): %s\n", worst,
                worst <= 1e-10 ? "OK" : "MISMATCH");
    return worst <= 1e-10 ? kExitOk : kExitFormat;
}

int run_check(const std::string& path, bool oracle) {
    const hmdc::ContainerPayload payload = hmdc::load_container(path);
    if (std::holds_alternative<hmdc::WeightOperator>(payload)) {
        return check_operator(std::get<hmdc::WeightOperator>(payload), oracle);
    }
    return check_cell(std::get<hmdc::LstmCell>(payload), oracle);
}

struct BenchCliOptions {
    std::string preset;
    std::string dims;
    std::vector<std::string> schemes{"hmd", "lmf", "csr"};
    std::vector<double> factors{2.0, 2.5, 3.33, 5.0};
    std::size_t warmup = 10;
    std::size_t iters = 100;
    std::size_t seq_len = 1;
    std::uint64_t seed = 1;
    std::string format = "csv";
    std::string out;
};

void add_bench_options(CLI::App* cmd, BenchCliOptions& opt, bool cell_mode) {
    cmd->add_option("--preset", opt.preset, "shape preset: har1 | har2 | ptb")
        ->check(CLI::IsMember({"har1", "har2", "ptb"}));
    cmd->add_option("--dims", opt.dims,
                    cell_mode ? "cell shape INPUTxHIDDEN" : "matrix shape MxN");
    cmd->add_option("--schemes", opt.schemes, "schemes to sweep")->delimiter(',');
    cmd->add_option("--factors", opt.factors, "compression factors to sweep")->delimiter(',');
    cmd->add_option("--warmup", opt.warmup, "warmup iterations");
    cmd->add_option("--iters", opt.iters, "measured iterations");
    if (cell_mode) {
        cmd->add_option("--seq-len", opt.seq_len, "sequence length per forward pass");
    }
    cmd->add_option("--seed", opt.seed, "weight/input seed");
    cmd->add_option("--format", opt.format, "report format")
        ->check(CLI::IsMember({"csv", "table"}));
    cmd->add_option("--out", opt.out, "write report to file instead of stdout");
}

int run_bench(const BenchCliOptions& opt, bool cell_mode) {
    hmdc::BenchConfig config;
    config.schemes = parse_schemes(opt.schemes);
    config.factors = opt.factors;
    config.warmup_iters = opt.warmup;
    config.measure_iters = opt.iters;
    config.seq_len = opt.seq_len;
    config.seed = opt.seed;

    if (!opt.preset.empty()) {
        const Preset& p = find_preset(opt.preset);
        config.input_dim = p.input_dim;
        config.hidden_dim = p.hidden_dim;
    } else if (!opt.dims.empty()) {
        const auto [a, b] = parse_dims(opt.dims);
        if (cell_mode) {
            config.input_dim = a;
            config.hidden_dim = b;
        } else {
            config.m = a;
            config.n = b;
        }
    } else {
        throw hmdc::ParameterError("bench: need --preset or --dims");
    }

    const std::vector<hmdc::BenchResult> results =
        cell_mode ? hmdc::run_cell_bench(config) : hmdc::run_matvec_bench(config);
    const hmdc::ReportFormat fmt =
        opt.format == "table" ? hmdc::ReportFormat::Table : hmdc::ReportFormat::Csv;
    write_text(opt.out, hmdc::emit_report(results, fmt));
    return kExitOk;
}

int run_report(const std::string& in, const std::string& format) {
    std::string text;
    if (in.empty() || in == "-") {
        std::ostringstream buf;
        buf << std::cin.rdbuf();
        text = buf.str();
    } else {
        std::ifstream file(in, std::ios::binary);
        if (!file) {
            throw hmdc::ParameterError("cannot open report: " + in);
        }
        std::ostringstream buf;
        buf << file.rdbuf();
        text = buf.str();
    }
    const std::vector<hmdc::BenchResult> results = hmdc::parse_report_csv(text);
    const hmdc::ReportFormat fmt =
        format == "table" ? hmdc::ReportFormat::Table : hmdc::ReportFormat::Csv;
    std::cout << hmdc::emit_report(results, fmt);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hmdc: hybrid matrix decomposition compression toolkit"};
    app.require_subcommand(1);

    // compress
    std::string c_in, c_scheme, c_out;
    double c_factor = 0.0;
    std::uint64_t c_seed = 1;
    CLI::App* compress = app.add_subcommand(
        "compress", "compress a weight container (or random:MxN) into a scheme");
    compress->add_option("--in", c_in, "container path, random:MxN, or random-cell:INxHID")
        ->required();
    compress->add_option("--scheme", c_scheme, "hmd | lmf | csr")
        ->required()
        ->check(CLI::IsMember({"hmd", "lmf", "csr"}));
    compress->add_option("--factor", c_factor, "target compression factor")->required();
    compress->add_option("--out", c_out, "output container path")->required();
    compress->add_option("--seed", c_seed, "seed for random: inputs");

    // check
    std::string k_path;
    bool k_oracle = false;
    CLI::App* check = app.add_subcommand("check", "inspect a container, optionally run the oracle");
    check->add_option("--a", k_path, "container path")->required();
    check->add_flag("--oracle", k_oracle, "compare against the dense reconstruction");

    // bench
    CLI::App* bench = app.add_subcommand("bench", "run the benchmark sweep");
    bench->require_subcommand(1);
    BenchCliOptions mv_opt, cell_opt;
    CLI::App* bench_matvec = bench->add_subcommand("matvec", "time a single matrix-vector product");
    add_bench_options(bench_matvec, mv_opt, false);
    CLI::App* bench_cell = bench->add_subcommand("cell", "time an LSTM cell forward pass");
    add_bench_options(bench_cell, cell_opt, true);

    // report
    std::string r_in, r_format;
    CLI::App* report = app.add_subcommand("report", "re-format a CSV report");
    report->add_option("--in", r_in, "CSV report path (default stdin)");
    report->add_option("--format", r_format, "csv | table")
        ->required()
        ->check(CLI::IsMember({"csv", "table"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (compress->parsed()) return run_compress(c_in, c_scheme, c_factor, c_out, c_seed);
        if (check->parsed()) return run_check(k_path, k_oracle);
        if (bench->parsed()) {
            return run_bench(bench_matvec->parsed() ? mv_opt : cell_opt, bench_cell->parsed());
        }
        if (report->parsed()) return run_report(r_in, r_format);
        std::fprintf(stderr, "no subcommand\n");
        return kExitUsage;
    } catch (const hmdc::InfeasibleError& ex) {
        std::fprintf(stderr, "infeasible: %s\n", ex.what());
        return kExitInfeasible;
    } catch (const hmdc::ContainerError& ex) {
        std::fprintf(stderr, "format error: %s\n", ex.what());
        return kExitFormat;
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return kExitUsage;
    }
}
