#include "circlefact/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>

namespace cli = circlefact::cli;

int main(int argc, char** argv)
{
    CLI::App app{"Root-subgroup factorization experiments for circle maps"};
    app.require_subcommand(1);

    struct Options {
        std::string config;
        std::uint64_t seed = 0;
        std::string out;
    };
    std::map<std::string, Options> opts;
    std::map<std::string, CLI::App*> subs;
    std::map<std::string, CLI::Option*> seed_opts;
    for (const std::string& name : cli::command_names()) {
        Options& o = opts[name];
        CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", o.config, "experiment config (JSON)")->check(CLI::ExistingFile);
        seed_opts[name] = sub->add_option("--seed", o.seed, "RNG seed, overrides the config");
        sub->add_option("--out", o.out, "output directory, overrides the config");
        subs[name] = sub;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? cli::kExitOk : cli::kExitPrecondition;
    }

    for (const auto& [name, sub] : subs) {
        if (!sub->parsed())
            continue;
        const Options& o = opts[name];
        try {
            cli::ExperimentConfig cfg = o.config.empty() ? cli::default_config(name) : cli::load_config(o.config);
            if (cfg.command != name) {
                std::cerr << "error: config command '" << cfg.command << "' does not match subcommand '"
                          << name << "'\n";
                return cli::kExitPrecondition;
            }
            if (seed_opts[name]->count())
                cfg.seed = o.seed;
            const std::string out_dir = o.out.empty() ? cfg.output : o.out;
            return cli::run_command(cfg, out_dir, cli::threads_from_env(), std::cerr);
        } catch (const circlefact::PreconditionError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return cli::kExitPrecondition;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
    }
    return cli::kExitPrecondition;
}
