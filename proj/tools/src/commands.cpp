#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "kdelab/cli.hpp"
#include "kdelab/clt_lab.hpp"

#ifndef KDELAB_VERSION
#define KDELAB_VERSION "0.0.0"
#endif

namespace kdelab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Outcome {
    json report;
    std::vector<CsvTable> tables;
    std::vector<std::string> outputs;  ///< files written by the command itself
    std::map<std::string, std::string> verdicts;
    bool failed = false;

    void verdict(const std::string& key, Verdict v) {
        verdicts[key] = to_string(v);
        failed = failed || v == Verdict::Fail;
    }
};

struct Context {
    std::string name;
    json eff;
    const RunOptions& options;
    fs::path out;
    bool want_csv = false;
};

std::optional<json> take(json& eff, const std::string& key) {
    if (!eff.contains(key)) return std::nullopt;
    json v = eff.at(key);
    eff.erase(key);
    if (v.is_null()) return std::nullopt;
    return v;
}

template <typename T>
T take_as(json& eff, const std::string& key, T fallback) {
    const auto v = take(eff, key);
    if (!v) return fallback;
    try {
        return v->get<T>();
    } catch (const std::exception& e) {
        throw std::invalid_argument(key + ": " + e.what());
    }
}

ExperimentConfig experiment(const Context& ctx, json eff) {
    auto cfg = ExperimentConfig::from_json(eff);
    if (ctx.options.threads) cfg.threads = *ctx.options.threads;
    if (cfg.threads < 0) throw std::invalid_argument("threads: must be >= 0");
    return cfg;
}

// ---------------------------------------------------------------------------

Outcome check_conditions(Context& ctx) {
    auto eff = ctx.eff;
    const auto beta_override = take(eff, "beta");
    const auto grid_json = take(eff, "condition_c_grid");
    const auto hallin_q = take(eff, "hallin_q");
    const auto qsum = take(eff, "qsum");
    const auto cfg = experiment(ctx, eff);
    const int d = cfg.dim();
    // Delta_n costs n^d tail evaluations
    std::vector<std::int64_t> grid;
    if (grid_json) {
        grid = grid_json->get<std::vector<std::int64_t>>();
    } else {
        for (std::int64_t n = 16; n <= 16384 && std::pow(double(n), d) <= double(1 << 20); n *= 2) grid.push_back(n);
    }
    const double gamma = cfg.bandwidth.gamma();

    Outcome o;
    json rep{{"dimension", d}, {"gamma", gamma}, {"model", cfg.model.to_json()}};
    std::optional<double> beta = cfg.model.beta();
    if (beta_override) beta = beta_override->get<double>();
    rep["beta"] = beta ? json(*beta) : json(nullptr);
    std::vector<ConditionReport> all;

    std::optional<double> delta = cfg.delta;
    std::string delta_source = delta ? "config" : "";
    if (beta) {
        const auto cor = check_corollary1(d, *beta, gamma);
        o.verdict("corollary1", cor.verdict);
        rep["corollary1"] = cor.to_json();
        all.push_back(cor);
        if (!delta && cor.delta_star) {
            delta = cor.delta_star;
            delta_source = "corollary1";
        }
    } else {
        rep["corollary1"] = nullptr;
        // exponentially decaying or finite models: beta is effectively infinite
        const double hi = std::min(gamma / d, 1.0 - gamma / d);
        if (!delta && hi > 0.0) {
            delta = 0.5 * hi;
            delta_source = "midpoint of (0, min(gamma/d, 1 - gamma/d))";
        }
    }
    rep["delta"] = delta ? json(*delta) : json(nullptr);
    rep["delta_source"] = delta_source;
    if (delta) {
        const auto cc = check_condition_c(cfg.model, cfg.bandwidth, *delta, grid);
        o.verdict("condition_c", cc.verdict);
        rep["condition_c"] = cc.to_json();
        all.push_back(cc);
    } else {
        rep["condition_c"] = nullptr;
        o.verdicts["condition_c"] = "not run (no admissible delta)";
    }
    // informational comparisons
    std::optional<double> q;
    if (hallin_q) q = hallin_q->get<double>();
    else if (cfg.model.to_json().value("family", "") == "power-decay") q = cfg.model.to_json().at("q").get<double>();
    if (q) {
        const auto h = check_hallin(d, *q, gamma);
        o.verdicts["hallin"] = to_string(h.verdict);
        rep["hallin"] = h.to_json();
        all.push_back(h);
    } else {
        rep["hallin"] = nullptr;
    }
    if (qsum) {
        const auto r = check_machkouri_qsum(cfg.model, qsum->value("q", 1.0), qsum->value("radius", std::int64_t{256}));
        o.verdicts["machkouri_qsum"] = to_string(r.verdict);
        rep["machkouri_qsum"] = r.to_json();
        all.push_back(r);
    } else {
        rep["machkouri_qsum"] = nullptr;
    }
    CsvTable t{"conditions", csv_schemas().at("check-conditions.conditions"), {}};
    for (const auto& c : all) t.rows.push_back({c.condition, to_string(c.verdict), c.label});
    o.tables.push_back(std::move(t));
    o.report = std::move(rep);
    return o;
}

Outcome gen_field(Context& ctx) {
    auto eff = ctx.eff;
    auto n_opt = take(eff, "n");
    const auto replicate = take_as<std::uint64_t>(eff, "replicate", 0);
    const auto cfg = experiment(ctx, eff);
    const std::int64_t n = n_opt ? n_opt->get<std::int64_t>() : cfg.n_grid.front();
    if (n < 1) throw std::invalid_argument("n: must be >= 1");
    const std::int64_t m = cfg.m_at(n);
    auto plan = cfg.plan_at(n);
    const auto opts = cfg.generation_options();
    json rep{{"n", n}, {"m", m}, {"plan", plan.to_json()}, {"replicate", replicate}};
    rep["estimated_bytes"] = estimated_generation_bytes(cfg.dim(), n, plan.radius, opts.method);
    const FieldGenerator gen(cfg.model, cfg.innovations, n, m, plan, opts);
    const SeedSpec seed{cfg.master_seed, static_cast<std::uint64_t>(n), replicate};
    const auto f = gen.generate(seed);
    double coupling = 0.0;
    for (std::size_t i = 0; i < f.full.size(); ++i) {
        coupling = std::max(coupling, std::fabs(f.full.values[i] - f.truncated.values[i] - f.residual.values[i]));
    }
    rep["convolution"] = to_string(gen.method());
    rep["full_variance"] = gen.full_variance();
    rep["truncated_variance"] = gen.truncated_variance();
    rep["coupling_max_error"] = coupling;
    rep["provenance"] = f.full.provenance.to_json();
    std::vector<MultiIndex> lags{MultiIndex(static_cast<std::size_t>(cfg.dim()), 0)};
    if (n >= 4) {
        for (int a = 0; a < cfg.dim(); ++a) {
            MultiIndex e(static_cast<std::size_t>(cfg.dim()), 0);
            e[static_cast<std::size_t>(a)] = 1;
            lags.push_back(e);
        }
    }
    rep["diagnostics"] = field_moment_diagnostics(f.full, cfg.model, lags).to_json();

    Outcome o;
    for (const auto* part : {&f.full, &f.truncated}) {
        const auto path = ctx.out / (ctx.name + "." + part->provenance.component + ".kdlf");
        std::ofstream fs_(path, std::ios::binary | std::ios::trunc);
        if (!fs_) throw std::runtime_error("cannot write " + path.string());
        write_field_binary(*part, fs_);
        o.outputs.push_back(path.string());
    }
    if (ctx.want_csv) {
        if (n <= 64) {
            for (const auto* part : {&f.full, &f.truncated}) {
                std::ostringstream ss;
                write_field_csv(*part, ss);
                const auto path = ctx.out / (ctx.name + "." + part->provenance.component + ".csv");
                write_file(path, ss.str());
                o.outputs.push_back(path.string());
            }
        } else {
            rep["csv_note"] = "field CSV is limited to side <= 64; use the binary files";
        }
    }
    o.report = std::move(rep);
    return o;
}

Outcome kde(Context& ctx) {
    auto eff = ctx.eff;
    auto n_opt = take(eff, "n");
    const auto replicate = take_as<std::uint64_t>(eff, "replicate", 0);
    const auto x_grid = take(eff, "x_grid");
    const auto cfg = experiment(ctx, eff);
    const std::int64_t n = n_opt ? n_opt->get<std::int64_t>() : cfg.n_grid.front();
    const std::int64_t m = cfg.m_at(n);
    const auto plan = cfg.plan_at(n);
    const double b = cfg.bandwidth_at(n);
    std::vector<double> xs;
    if (x_grid) {
        const double lo = x_grid->at("from").get<double>(), hi = x_grid->at("to").get<double>();
        const auto count = x_grid->at("count").get<std::int64_t>();
        if (count < 1 || !(hi >= lo)) throw std::invalid_argument("x_grid: need count >= 1 and to >= from");
        for (std::int64_t i = 0; i < count; ++i) xs.push_back(count == 1 ? lo : lo + (hi - lo) * i / double(count - 1));
    } else {
        xs = cfg.resolved_x();
    }
    const FieldGenerator gen(cfg.model, cfg.innovations, n, m, plan, cfg.generation_options());
    const auto f = gen.generate({cfg.master_seed, static_cast<std::uint64_t>(n), replicate});
    const MultiIndex zero(static_cast<std::size_t>(cfg.dim()), 0);
    const auto oracle = density_oracle(cfg.model, cfg.innovations, m, zero);
    json rep{{"n", n}, {"m", m}, {"b", b}, {"plan", plan.to_json()}, {"replicate", replicate},
             {"kernel", cfg.kernel.name()}, {"oracle", oracle.to_json()}};
    CsvTable t{"estimates", csv_schemas().at("kde.estimates"), {}};
    json pts = json::array();
    for (double x : xs) {
        json p{{"x", x},
               {"fn", kde_estimate(f.full, x, b, cfg.kernel)},
               {"fn_truncated", kde_estimate(f.truncated, x, b, cfg.kernel)}};
        if (oracle.exact) {
            p["p"] = oracle.p(x);
            p["expected_fn"] = expected_fn(oracle, cfg.kernel, b, x);
            p["sigma2"] = asymptotic_variance(oracle.p(x), cfg.kernel);
        } else {
            p["p"] = nullptr;
            p["expected_fn"] = nullptr;
            p["sigma2"] = nullptr;
        }
        t.rows.push_back({p["x"], p["fn"], p["fn_truncated"], p["p"], p["expected_fn"], p["sigma2"]});
        pts.push_back(std::move(p));
    }
    rep["points"] = std::move(pts);
    Outcome o;
    o.tables.push_back(std::move(t));
    o.report = std::move(rep);
    return o;
}

Outcome clt_run(Context& ctx) {
    auto eff = ctx.eff;
    const bool include_replicates = take_as<bool>(eff, "include_replicates", false);
    const auto cfg = experiment(ctx, eff);
    const auto rep = run_clt_experiment(cfg);
    Outcome o;
    o.verdict("clt", rep.verdict);
    o.report = rep.to_json(include_replicates);
    CsvTable s{"summary", csv_schemas().at("clt-run.summary"), {}};
    CsvTable r{"replicates", csv_schemas().at("clt-run.replicates"), {}};
    for (const auto& p : rep.points) {
        s.rows.push_back({p.n, p.m, p.radius, p.b, p.x, p.px, p.sigma2, p.site_variance, p.centering.ez,
                          p.centering.ezeta, p.moments.mean, p.moments.variance, p.moments.variance / p.sigma2,
                          p.moments.skewness, p.moments.excess_kurtosis, p.ks.distance, p.ks.p_value,
                          p.remainder_second_moment, p.remainder_variance, p.max_identity_error,
                          to_string(p.verdict)});
        for (std::size_t i = 0; i < p.t_n.size(); ++i) {
            r.rows.push_back({p.n, p.x, i, p.t_n[i], p.t_zeta[i], p.t_remainder[i]});
        }
    }
    o.tables.push_back(std::move(s));
    o.tables.push_back(std::move(r));
    return o;
}

Outcome blocks(Context& ctx) {
    auto eff = ctx.eff;
    BlockPlanSpec spec;
    if (auto v = take(eff, "block_side")) spec.block_side = v->get<std::int64_t>();
    if (auto v = take(eff, "gap")) spec.gap = v->get<std::int64_t>();
    const auto eps = take_as<std::vector<double>>(eff, "epsilons", {0.5, 1.0, 2.0});
    const auto cfg = experiment(ctx, eff);
    const auto rep = eps.empty() ? block_decomposition_check(cfg, spec) : lindeberg_estimate(cfg, spec, eps);
    Outcome o;
    o.verdict("blocks", rep.verdict);
    if (!eps.empty()) o.verdict("lindeberg", rep.lindeberg_verdict);
    o.report = rep.to_json();
    CsvTable t{"points", csv_schemas().at("blocks.points"), {}};
    CsvTable l{"lindeberg", csv_schemas().at("blocks.lindeberg"), {}};
    for (const auto& p : rep.points) {
        t.rows.push_back({p.n, p.plan.m, p.plan.block_side, p.plan.gap, p.plan.blocks_per_axis, p.b,
                          p.covered_fraction, p.rate_proxy, p.gap_mean, p.gap_variance, p.adjacent_correlation,
                          p.correlation_threshold, p.lag1_correlation, p.lagm_correlation, p.lf1, p.lf1_target,
                          p.sigma2});
        for (std::size_t k = 0; k < p.lf2.size(); ++k) {
            l.rows.push_back({p.n, rep.epsilons[k], p.lf2[k], static_cast<bool>(p.lf2_trivially_zero[k])});
        }
    }
    o.tables.push_back(std::move(t));
    o.tables.push_back(std::move(l));
    return o;
}

Outcome moment_check(Context& ctx) {
    auto eff = ctx.eff;
    const auto rects_json = take(eff, "rectangles");
    const double cap = take_as<double>(eff, "ratio_cap", 3.0);
    const auto wu = take(eff, "wu");
    const auto cfg = experiment(ctx, eff);
    std::vector<MultiIndex> rects;
    if (rects_json) {
        rects = rects_json->get<std::vector<MultiIndex>>();
    } else {
        for (std::int64_t s = 2; s <= cfg.n_grid.back(); s *= 2) rects.emplace_back(static_cast<std::size_t>(cfg.dim()), s);
    }
    Outcome o;
    const auto rr = rectangle_moment_check(cfg, rects, cap);
    o.verdict("rectangles", rr.verdict);
    json rep{{"rectangles", rr.to_json()}};
    CsvTable t{"rectangles", csv_schemas().at("moment-check.rectangles"), {}};
    for (const auto& r : rr.rows) {
        std::string sides;
        for (std::size_t i = 0; i < r.sides.size(); ++i) sides += (i ? "x" : "") + std::to_string(r.sides[i]);
        t.rows.push_back({r.n, sides, r.zeta_norm, r.remainder_norm, r.remainder_constant});
    }
    o.tables.push_back(std::move(t));

    const bool wu_enabled = !wu || wu->value("enabled", true);
    json wus = json::array();
    CsvTable w{"wu", csv_schemas().at("moment-check.wu"), {}};
    if (wu_enabled) {
        std::vector<int> ps = wu ? wu->value("p", std::vector<int>{1, 2}) : std::vector<int>{1, 2};
        const auto samples = wu ? wu->value("samples", std::size_t{100000}) : std::size_t{100000};
        for (int p : ps) {
            if (p == 2 && !cfg.innovations.has_finite_moment(4.0)) {
                o.verdicts["wu_p2"] = "skipped (no finite fourth moment)";
                continue;
            }
            const auto r = wu_inequality_check(cfg.model, cfg.innovations, p, samples,
                                               {cfg.master_seed, 0x5775, static_cast<std::uint64_t>(p)}, cfg.threads);
            o.verdict("wu_p" + std::to_string(p), r.verdict);
            wus.push_back(r.to_json());
            w.rows.push_back({r.p, r.samples, r.radius, r.moment, r.constant, r.standard_error, r.expected_constant,
                              r.z, to_string(r.verdict)});
        }
    }
    rep["wu"] = std::move(wus);
    rep["config"] = cfg.to_json();
    o.tables.push_back(std::move(w));
    o.report = std::move(rep);
    return o;
}

Outcome fixed_m_gap_cmd(Context& ctx) {
    auto eff = ctx.eff;
    const auto growing = take(eff, "growing_delta");
    const double tol = take_as<double>(eff, "tolerance", 0.15);
    const auto cfg = experiment(ctx, eff);
    if (!cfg.m_fixed) throw std::invalid_argument("m: fixed-m-gap needs a fixed m");
    const auto rep = fixed_m_gap(cfg, *cfg.m_fixed, cfg.n_grid,
                                 growing ? std::optional<double>(growing->get<double>()) : std::nullopt, tol);
    Outcome o;
    o.verdict("fixed_m_gap", rep.verdict);
    o.report = rep.to_json();
    CsvTable t{"gaps", csv_schemas().at("fixed-m-gap.gaps"), {}};
    for (const auto* rows : {&rep.fixed, &rep.growing}) {
        for (const auto& g : *rows) {
            t.rows.push_back({rows == &rep.fixed ? "fixed" : "growing", g.n, g.m, g.b, g.gap, g.gap_standard_error,
                              g.centered_gap, g.exact_gap, g.bound_proxy});
        }
    }
    o.tables.push_back(std::move(t));
    return o;
}

const std::map<std::string, std::function<Outcome(Context&)>>& dispatch() {
    static const std::map<std::string, std::function<Outcome(Context&)>> table{
        {"check-conditions", check_conditions}, {"gen-field", gen_field}, {"kde", kde},
        {"clt-run", clt_run}, {"blocks", blocks}, {"moment-check", moment_check},
        {"fixed-m-gap", fixed_m_gap_cmd}};
    return table;
}

}  // namespace

int run_subcommand(const std::string& name, const RunOptions& options, std::ostream& out, std::ostream& err) {
    RunManifest man;
    man.subcommand = name;
    man.version = KDELAB_VERSION;
    man.started = utc_now();
    man.overrides = options.overrides;
    man.seed = options.seed;
    man.threads = options.threads.value_or(1);
    const fs::path dir = resolve_out_dir(options);
    bool dir_ok = false;
    try {
        fs::create_directories(dir);
        dir_ok = true;
        const auto it = dispatch().find(name);
        if (it == dispatch().end()) throw std::invalid_argument("unknown subcommand '" + name + "'");
        if (options.format != "json" && options.format != "csv" && options.format != "both") {
            throw std::invalid_argument("format: expected json, csv or both");
        }
        json doc = json::object();
        if (options.config_path) {
            std::ifstream f(*options.config_path);
            if (!f) throw std::invalid_argument("config: cannot open " + *options.config_path);
            try {
                doc = json::parse(f);
            } catch (const json::parse_error& e) {
                throw std::invalid_argument("config: " + std::string(e.what()));
            }
        }
        const auto& names = subcommand_names();
        std::vector<std::string> late;
        for (const auto& o : options.overrides) {
            const auto head = o.substr(0, o.find_first_of(".="));
            if (std::find(names.begin(), names.end(), head) != names.end()) {
                apply_override(doc, o);
            } else {
                late.push_back(o);
            }
        }
        man.document = doc;
        Context ctx{name, effective_config(doc, name), options, dir, options.format != "json"};
        for (const auto& o : late) apply_override(ctx.eff, o);
        if (options.seed) ctx.eff["seed"] = *options.seed;
        ctx.eff.erase("threads");
        man.config = ctx.eff;

        Outcome res = it->second(ctx);
        man.outputs = res.outputs;
        man.verdicts = res.verdicts;
        if (options.format != "csv") {
            json report = res.report;
            report["schema_version"] = kReportSchema;
            report["subcommand"] = name;
            report["verdicts"] = res.verdicts;
            const auto path = dir / (name + ".json");
            write_file(path, to_stable_json(report));
            man.outputs.push_back(path.string());
        }
        if (options.format != "json") {
            for (const auto& t : res.tables) {
                const auto path = dir / (name + "." + t.name + ".csv");
                write_file(path, t.render());
                man.outputs.push_back(path.string());
            }
        }
        man.exit_code = res.failed ? 2 : 0;
        man.status = res.failed ? "verdict-fail" : "ok";
        for (const auto& [k, v] : res.verdicts) out << name << ": " << k << " = " << v << "\n";
    } catch (const std::exception& e) {
        err << "kdelab " << name << ": error: " << e.what() << "\n";
        man.exit_code = 1;
        man.status = "error";
        man.error = e.what();
    }
    man.finished = utc_now();
    if (dir_ok) {
        try {
            const auto path = dir / (name + ".manifest.json");
            write_file(path, to_stable_json(man.to_json()));
        } catch (const std::exception& e) {
            err << "kdelab " << name << ": error: " << e.what() << "\n";
            return 1;
        }
    }
    return man.exit_code;
}

}  // namespace kdelab::cli
