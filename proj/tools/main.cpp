#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "renorm/cli/runner.hpp"

using namespace renorm::cli;

namespace {

int report_failure(const std::exception& e, const std::filesystem::path* out_dir) {
    auto [code, report] = failure_report(e);
    report["exit_code"] = code;
    std::cerr << report.dump(2) << '\n';
    if (out_dir) {
        std::error_code ec;
        std::filesystem::create_directories(*out_dir, ec);
        std::ofstream(*out_dir / "failure.json") << report.dump(2) << '\n';
    }
    return code;
}

json load_run(const std::filesystem::path& p) {
    const auto file = std::filesystem::is_directory(p) ? p / "run.json" : p;
    return read_config(file);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rauzy-Veech renormalization experiments for genus-one generalized interval exchange maps"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::optional<std::size_t> depth;
    std::optional<unsigned> bits;
    std::optional<std::uint64_t> seed;
    bool assert_checks = false;

    auto* run_cmd = app.add_subcommand("run", "Run the experiment described by a config file");
    run_cmd->add_option("--config", config_path, "Config file (JSON)")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--out", out_dir, "Output directory (overrides the config)");
    run_cmd->add_option("--depth", depth, "Maximal depth N (overrides the config)");
    run_cmd->add_option("--bits", bits, "Float bits (overrides the config)");
    run_cmd->add_option("--seed", seed, "Random seed for sampled checks (overrides the config)");
    run_cmd->add_flag("--assert", assert_checks, "Exit with code 5 when a check of the run fails");

    std::string run_a, run_b, diff_out;
    std::optional<double> tolerance;
    auto* cmp_cmd = app.add_subcommand("compare", "Per-column differences between two runs");
    cmp_cmd->add_option("first", run_a, "run.json or its directory")->required();
    cmp_cmd->add_option("second", run_b, "run.json or its directory")->required();
    cmp_cmd->add_option("--out", diff_out, "Write the diff report to this file");
    cmp_cmd->add_option("--tolerance", tolerance, "With --assert, largest accepted relative difference");
    cmp_cmd->add_flag("--assert", assert_checks, "Exit with code 5 when the runs differ beyond the tolerance");

    auto* val_cmd = app.add_subcommand("validate-map", "Build and validate the map of a config file");
    val_cmd->add_option("--config", config_path, "Config file (JSON)")->required()->check(CLI::ExistingFile);
    val_cmd->add_option("--bits", bits, "Float bits (overrides the config)");

    CLI11_PARSE(app, argc, argv);

    if (run_cmd->parsed()) {
        std::filesystem::path out;
        try {
            json j = read_config(config_path);
            if (!out_dir.empty()) j["output"] = out_dir;
            if (depth) j["depth"] = *depth;
            if (bits) j["arithmetic"]["float_bits"] = *bits;
            if (seed) j["seed"] = *seed;
            const auto config = parse_config(j);
            out = config.output;
            const auto record = run(config);
            write_outputs(record);
            for (const auto& c : record.checks)
                std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
            std::cout << "wrote " << out.string() << '\n';
            if (assert_checks && !record.passed()) return AssertionFailure;
            return Success;
        } catch (const std::exception& e) {
            return report_failure(e, out.empty() ? nullptr : &out);
        }
    }

    if (cmp_cmd->parsed()) {
        try {
            const auto diff = compare_runs(load_run(run_a), load_run(run_b));
            if (diff_out.empty())
                std::cout << diff.dump(2) << '\n';
            else
                std::ofstream(diff_out) << diff.dump(2) << '\n';
            if (assert_checks) {
                if (!diff["shape"].empty()) return AssertionFailure;
                const long double tol = tolerance.value_or(0.0);
                for (const auto& d : diff["differences"])
                    if (std::stold(d["max_relative_difference"].get<std::string>()) > tol) return AssertionFailure;
            }
            return Success;
        } catch (const std::exception& e) {
            return report_failure(e, nullptr);
        }
    }

    try {
        json j = read_config(config_path);
        if (bits) j["arithmetic"]["float_bits"] = *bits;
        const auto report = validate_family(parse_config(j));
        std::cout << report.dump(2) << '\n';
        return report.value("ok", false) ? Success : ConfigFailure;
    } catch (const std::exception& e) {
        return report_failure(e, nullptr);
    }
}
