#include <algorithm>

#include <CLI11.hpp>

#include "kdelab/cli.hpp"

namespace kdelab::cli {

namespace {

const std::map<std::string, std::string>& descriptions() {
    static const std::map<std::string, std::string> d{
        {"check-conditions", "Decide the coefficient/bandwidth conditions for a model"},
        {"gen-field", "Generate one coupled pair (X, X_m) and write it"},
        {"kde", "Evaluate the kernel density estimate on one realization"},
        {"clt-run", "Monte Carlo study of the normalized estimator"},
        {"blocks", "Big-block/small-block decomposition and Lindeberg estimates"},
        {"moment-check", "Rectangle-sum and linear-form moment inequalities"},
        {"fixed-m-gap", "Gap E(zeta - Z)^2 for fixed and growing m"}};
    return d;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"kdelab: kernel density estimation on causal linear random fields"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", KDELAB_VERSION);
    RunOptions opt;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string config, out_dir;
    std::map<std::string, CLI::App*> subs;
    for (const auto& name : subcommand_names()) {
        auto* sub = app.add_subcommand(name, descriptions().at(name));
        sub->add_option("--config", config, "JSON config document")->check(CLI::ExistingFile);
        sub->add_option("--set", opt.overrides, "Override key=value (dotted path, repeatable)");
        sub->add_option("--seed", seed, "Master seed");
        sub->add_option("--threads", threads, "Worker threads (0 = all cores); never changes results");
        sub->add_option("--out", out_dir, "Output directory (default $KDELAB_OUT_DIR or ./kdelab-out)");
        sub->add_option("--format", opt.format, "Report format")->check(CLI::IsMember({"json", "csv", "both"}));
        subs[name] = sub;
    }
    if (argc > 1 && argv[1][0] != '-') {
        const auto& names = subcommand_names();
        if (std::find(names.begin(), names.end(), argv[1]) == names.end()) {
            err << "kdelab: error: unknown subcommand '" << argv[1] << "'\nRun with --help for the list.\n";
            return 1;
        }
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }
    for (const auto& [name, sub] : subs) {
        if (!sub->parsed()) continue;
        if (sub->count("--config")) opt.config_path = config;
        if (sub->count("--seed")) opt.seed = seed;
        if (sub->count("--threads")) opt.threads = threads;
        if (sub->count("--out")) opt.out_dir = out_dir;
        return run_subcommand(name, opt, out, err);
    }
    return 1;
}

}  // namespace kdelab::cli
