#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "hmdc/error.hpp"
#include "hmdc/lstm.hpp"
#include "hmdc/operator.hpp"
#include "hmdc/random.hpp"

namespace hmdc {

// Benchmark protocol: seeded random weights, single thread, batch size 1,
// warmup iterations followed by measured iterations with per-iteration
// wall-clock sampling. Two machines given the same config build identical
// matrices; only the timings differ.
struct BenchConfig {
    // Cell shape; run_matvec_bench maps it to the fused recurrent matrix.
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;
    // Raw matrix shape; takes precedence for run_matvec_bench when set.
    std::size_t m = 0;
    std::size_t n = 0;

    std::vector<Scheme> schemes{Scheme::Hmd, Scheme::Lmf, Scheme::Csr};
    std::vector<double> factors{2.0, 2.5, 3.33, 5.0};
    std::size_t warmup_iters = 10;
    std::size_t measure_iters = 100;
    std::size_t seq_len = 1;
    std::uint64_t seed = 1;
};

struct BenchResult {
    Scheme scheme = Scheme::Dense;
    double requested_factor = 1.0;
    bool feasible = true;
    double achieved_factor = 1.0;
    std::size_t params = 0;
    std::size_t macs = 0;
    double median_ns = 0.0;
    double p10_ns = 0.0;
    double p90_ns = 0.0;
    double speedup_vs_dense = 1.0;
};

enum class ReportFormat { Csv, Table };

namespace detail {

struct TimingStats {
    double median_ns = 0.0;
    double p10_ns = 0.0;
    double p90_ns = 0.0;
};

inline double nearest_rank(const std::vector<double>& sorted, double pct) {
    const std::size_t n = sorted.size();
    std::size_t idx = static_cast<std::size_t>(std::ceil(pct / 100.0 * static_cast<double>(n)));
    if (idx > 0) --idx;
    if (idx >= n) idx = n - 1;
    return sorted[idx];
}

template <typename Body>
TimingStats time_iterations(Body&& body, std::size_t warmup, std::size_t measure) {
    for (std::size_t i = 0; i < warmup; ++i) body();
    std::vector<double> samples(measure);
    for (std::size_t i = 0; i < measure; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        body();
        const auto t1 = std::chrono::steady_clock::now();
        samples[i] = std::chrono::duration<double, std::nano>(t1 - t0).count();
    }
    std::sort(samples.begin(), samples.end());
    return {nearest_rank(samples, 50.0), nearest_rank(samples, 10.0), nearest_rank(samples, 90.0)};
}

inline void validate_config(const BenchConfig& config) {
    if (config.measure_iters < 1) {
        throw ParameterError("bench: measure_iters must be >= 1");
    }
    for (double f : config.factors) {
        if (!(f > 1.0)) {
            throw ParameterError("bench: compression factors must be > 1");
        }
    }
}

// Keeps the timed call from being optimized away.
inline volatile double g_bench_sink = 0.0;

} // namespace detail

// Matvec comparison over one seeded random matrix: dense baseline first,
// then one row per (scheme, factor). Infeasible pairs come back as
// non-feasible rows rather than aborting the sweep.
inline std::vector<BenchResult> run_matvec_bench(const BenchConfig& config) {
    detail::validate_config(config);
    std::size_t m = config.m;
    std::size_t n = config.n;
    if (m == 0 || n == 0) {
        if (config.input_dim == 0 || config.hidden_dim == 0) {
            throw ParameterError("bench: need raw dims or a cell shape");
        }
        m = 4 * config.hidden_dim;
        n = config.hidden_dim;
    }
    if (m < 2 || n < 2) {
        throw ParameterError("bench: dims must be >= 2");
    }

    const DenseMatrix a = random_dense(m, n, config.seed);
    const RealVector x = random_vector(n, config.seed + 1);

    std::vector<BenchResult> results;
    BenchResult dense_row;
    dense_row.params = m * n;
    dense_row.macs = m * n;
    const detail::TimingStats dense_t = detail::time_iterations(
        [&] { detail::g_bench_sink = dense_matvec(a, x)[0]; },
        config.warmup_iters, config.measure_iters);
    dense_row.median_ns = dense_t.median_ns;
    dense_row.p10_ns = dense_t.p10_ns;
    dense_row.p90_ns = dense_t.p90_ns;
    dense_row.speedup_vs_dense = 1.0;
    results.push_back(dense_row);

    for (Scheme scheme : config.schemes) {
        for (double factor : config.factors) {
            BenchResult row;
            row.scheme = scheme;
            row.requested_factor = factor;
            try {
                const WeightOperator op = compress_dense(a, scheme, factor);
                row.params = op.param_count();
                row.macs = op.mac_count();
                row.achieved_factor =
                    static_cast<double>(m * n) / static_cast<double>(row.params);
                const detail::TimingStats t = detail::time_iterations(
                    [&] { detail::g_bench_sink = op.matvec(x)[0]; },
                    config.warmup_iters, config.measure_iters);
                row.median_ns = t.median_ns;
                row.p10_ns = t.p10_ns;
                row.p90_ns = t.p90_ns;
                row.speedup_vs_dense = dense_row.median_ns / row.median_ns;
            } catch (const InfeasibleError&) {
                row.feasible = false;
            }
            results.push_back(row);
        }
    }
    return results;
}

// Same protocol timing a full forward pass of seq_len steps.
inline std::vector<BenchResult> run_cell_bench(const BenchConfig& config) {
    detail::validate_config(config);
    if (config.input_dim == 0 || config.hidden_dim == 0) {
        throw ParameterError("bench: cell bench needs input_dim and hidden_dim");
    }
    if (config.input_dim < 2 || config.hidden_dim < 2) {
        throw ParameterError("bench: dims must be >= 2");
    }
    const std::size_t in_dim = config.input_dim;
    const std::size_t hd = config.hidden_dim;

    const LstmCell dense_cell(
        in_dim, hd,
        WeightOperator(random_dense(4 * hd, in_dim, config.seed)),
        WeightOperator(random_dense(4 * hd, hd, config.seed + 1)),
        random_vector(4 * hd, config.seed + 2));

    std::vector<RealVector> sequence;
    sequence.reserve(config.seq_len);
    for (std::size_t t = 0; t < config.seq_len; ++t) {
        sequence.push_back(random_vector(in_dim, config.seed + 3 + t));
    }
    const LstmState init = lstm_zero_state(dense_cell);
    const std::size_t dense_weight_params = cell_param_count(dense_cell).weight_params;

    auto run_row = [&](const LstmCell& cell, BenchResult& row) {
        row.params = cell_param_count(cell).total();
        row.macs = cell_mac_count(cell, config.seq_len).matvec_macs;
        const detail::TimingStats t = detail::time_iterations(
            [&] {
                const std::vector<LstmState> states = lstm_forward(cell, sequence, init);
                detail::g_bench_sink = states.empty() ? 0.0 : states.back().h[0];
            },
            config.warmup_iters, config.measure_iters);
        row.median_ns = t.median_ns;
        row.p10_ns = t.p10_ns;
        row.p90_ns = t.p90_ns;
    };

    std::vector<BenchResult> results;
    BenchResult dense_row;
    run_row(dense_cell, dense_row);
    dense_row.speedup_vs_dense = 1.0;
    results.push_back(dense_row);

    for (Scheme scheme : config.schemes) {
        for (double factor : config.factors) {
            BenchResult row;
            row.scheme = scheme;
            row.requested_factor = factor;
            try {
                const LstmCell cell = compress_cell(dense_cell, scheme, factor);
                run_row(cell, row);
                row.achieved_factor =
                    static_cast<double>(dense_weight_params) /
                    static_cast<double>(cell_param_count(cell).weight_params);
                row.speedup_vs_dense = dense_row.median_ns / row.median_ns;
            } catch (const InfeasibleError&) {
                row.feasible = false;
            }
            results.push_back(row);
        }
    }
    return results;
}

namespace detail {

// Shortest round-trip decimal form, so a re-parsed report is bit-equal.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace detail

inline const char* report_header() {
    return "scheme,requested_factor,achieved_factor,params,macs,median_ns,p10_ns,p90_ns,speedup";
}

inline std::string emit_report(const std::vector<BenchResult>& results, ReportFormat format) {
    if (results.empty()) {
        throw ParameterError("emit_report: no results");
    }
    std::string out;
    if (format == ReportFormat::Csv) {
        out += report_header();
        out += "\r\n";
        for (const BenchResult& r : results) {
            out += scheme_name(r.scheme);
            out += ',';
            out += detail::format_double(r.requested_factor);
            out += ',';
            if (r.feasible) {
                out += detail::format_double(r.achieved_factor);
                out += ',';
                out += std::to_string(r.params);
                out += ',';
                out += std::to_string(r.macs);
                out += ',';
                out += detail::format_double(r.median_ns);
                out += ',';
                out += detail::format_double(r.p10_ns);
                out += ',';
                out += detail::format_double(r.p90_ns);
                out += ',';
                out += detail::format_double(r.speedup_vs_dense);
            } else {
                out += ",,,,,,";
            }
            out += "\r\n";
        }
        return out;
    }

    char line[256];
    std::snprintf(line, sizeof(line), "%-6s %9s %9s %10s %10s %12s %12s %12s %8s\n",
                  "scheme", "factor", "achieved", "params", "macs", "median_ns", "p10_ns",
                  "p90_ns", "speedup");
    out += line;
    for (const BenchResult& r : results) {
        if (r.feasible) {
            std::snprintf(line, sizeof(line),
                          "%-6s %9.4g %9.4f %10zu %10zu %12.0f %12.0f %12.0f %8.3f\n",
                          scheme_name(r.scheme), r.requested_factor, r.achieved_factor, r.params,
                          r.macs, r.median_ns, r.p10_ns, r.p90_ns, r.speedup_vs_dense);
        } else {
            std::snprintf(line, sizeof(line), "%-6s %9.4g %s\n", scheme_name(r.scheme),
                          r.requested_factor, "infeasible");
        }
        out += line;
    }
    return out;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

inline double parse_double_field(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ParameterError("report: bad numeric field '" + s + "'");
    }
    return v;
}

} // namespace detail

// Parse a CSV report back into rows, accepting both \r\n and \n endings.
inline std::vector<BenchResult> parse_report_csv(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char ch : text) {
        if (ch == '\n') {
            if (!cur.empty() && cur.back() == '\r') cur.pop_back();
            lines.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) lines.push_back(std::move(cur));
    if (lines.empty() || lines.front() != report_header()) {
        throw ParameterError("report: missing or unexpected header row");
    }

    std::vector<BenchResult> results;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        if (lines[li].empty()) continue;
        const std::vector<std::string> f = detail::split_csv_line(lines[li]);
        if (f.size() != 9) {
            throw ParameterError("report: expected 9 fields per row");
        }
        BenchResult r;
        r.scheme = scheme_from_name(f[0]);
        r.requested_factor = detail::parse_double_field(f[1]);
        if (f[2].empty()) {
            r.feasible = false;
        } else {
            r.achieved_factor = detail::parse_double_field(f[2]);
            r.params = static_cast<std::size_t>(detail::parse_double_field(f[3]));
            r.macs = static_cast<std::size_t>(detail::parse_double_field(f[4]));
            r.median_ns = detail::parse_double_field(f[5]);
            r.p10_ns = detail::parse_double_field(f[6]);
            r.p90_ns = detail::parse_double_field(f[7]);
            r.speedup_vs_dense = detail::parse_double_field(f[8]);
        }
        results.push_back(r);
    }
    return results;
}

} // namespace hmdc
