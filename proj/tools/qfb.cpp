// qfb: run, list and validate scenario configs.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "qfb/scenarios.hpp"

namespace {

int exit_code(const qfb::Error& e) { return e.is_validation() ? 2 : 3; }

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"qfb scenario runner (worker threads: QFB_THREADS)"};
    app.require_subcommand(1);

    std::string sim_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    auto* sim = app.add_subcommand("simulate", "run the scenario named in a config file");
    sim->add_option("config", sim_path, "config file")->required();
    sim->add_option("--seed", seed, "base seed (overrides ensemble.base_seed)");
    sim->add_option("--out", out, "output directory (overrides output.dir)");

    auto* list = app.add_subcommand("scenarios", "list built-in scenarios and their required keys");

    std::string check_path;
    auto* chk = app.add_subcommand("check", "parse and validate a config without running it");
    chk->add_option("config", check_path, "config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*list) {
            for (const auto& s : qfb::list_scenarios()) {
                std::cout << s.name << "\n    " << s.description << "\n    required:";
                for (const auto& k : s.required) std::cout << ' ' << k;
                std::cout << '\n';
            }
            return 0;
        }
        if (*chk) {
            const auto cfg = qfb::parse_config(check_path);
            std::cout << "ok: " << cfg.scenario << '\n';
            return 0;
        }
        auto cfg = qfb::parse_config(sim_path);
        if (seed) cfg.seed = *seed;
        if (out) cfg.out = *out;
        const auto m = qfb::run_scenario(cfg);
        for (const auto& f : m.files) std::cout << (cfg.out / f.name).string() << "  " << f.fnv1a << '\n';
        for (const auto& [k, v] : m.summary) std::cout << k << " = " << qfb::format_double(v) << '\n';
        return 0;
    } catch (const qfb::Error& e) {
        std::cerr << "qfb: " << e.what() << '\n';
        return exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "qfb: " << e.what() << '\n';
        return 3;
    }
}
