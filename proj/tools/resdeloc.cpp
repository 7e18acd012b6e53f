#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "resdeloc/experiments.hpp"

namespace {

using resdeloc::json;

struct Flags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> samples;
    std::vector<std::size_t> M;
    std::optional<double> lambda;
    std::optional<std::string> center;
    std::optional<double> window;
    std::optional<double> tol;
    std::optional<double> success_fraction;
    std::optional<std::size_t> seba_samples;
    std::vector<double> alphas;
    std::vector<double> lambda_grid;
    std::vector<std::string> center_grid;
    bool zero_potential = false;
    std::string out;
    std::string format = "jsonl";
};

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config_path, "key = value or JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", f.seed, "master seed");
    sub->add_option("--samples", f.samples, "samples per ensemble");
    sub->add_option("--M", f.M, "system size, repeat for a sweep")->take_all();
    sub->add_option("--lambda", f.lambda, "disorder strength");
    sub->add_option("--center", f.center, "energy, E_hat_minus1 or E_hat_zero");
    sub->add_option("--window", f.window, "half-width W of the scaling window");
    sub->add_option("--tol", f.tol, "root tolerance");
    sub->add_option("--success-fraction", f.success_fraction, "required fraction for probabilistic checks");
    sub->add_option("--seba-samples", f.seba_samples, "size of Seba reference ensembles");
    sub->add_option("--alpha", f.alphas, "Seba level, repeatable")->take_all();
    sub->add_option("--lambda-grid", f.lambda_grid, "phase diagram lambda values")->take_all();
    sub->add_option("--center-grid", f.center_grid, "phase diagram centers")->take_all();
    sub->add_flag("--zero-potential", f.zero_potential, "validation mode with V = 0");
    sub->add_option("--out", f.out, "row output path");
    sub->add_option("--format", f.format, "row format")->check(CLI::IsMember({"jsonl", "csv"}));
}

resdeloc::ExperimentConfig build_config(const std::string& name, const Flags& f) {
    resdeloc::ExperimentConfig cfg = resdeloc::default_config(name);
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        auto first = text.find_first_not_of(" \t\r\n");
        json j;
        if (first != std::string::npos && text[first] == '{') {
            try {
                j = json::parse(text);
            } catch (const json::parse_error& e) {
                throw resdeloc::ConfigError(std::string("config: ") + e.what());
            }
        } else {
            j = resdeloc::parse_key_value(text);
        }
        if (j.contains("experiment") && j["experiment"] != name)
            throw resdeloc::ConfigError("config file is for experiment " + j["experiment"].dump());
        resdeloc::apply_config(cfg, j);
    }
    if (f.seed) cfg.seed = *f.seed;
    if (f.samples) cfg.samples = *f.samples;
    if (!f.M.empty()) cfg.M = f.M;
    if (f.lambda) cfg.lambda = *f.lambda;
    if (f.center) cfg.center = *f.center;
    if (f.window) cfg.window = *f.window;
    if (f.tol) cfg.tol = *f.tol;
    if (f.success_fraction) cfg.success_fraction = *f.success_fraction;
    if (f.seba_samples) cfg.seba_samples = *f.seba_samples;
    if (!f.alphas.empty()) cfg.alphas = f.alphas;
    if (!f.lambda_grid.empty()) cfg.lambda_grid = f.lambda_grid;
    if (!f.center_grid.empty()) cfg.center_grid = f.center_grid;
    if (f.zero_potential) cfg.zero_potential = true;
    return cfg;
}

void write_rows(const resdeloc::RunRecord& rec, const std::string& experiment, const Flags& f) {
    if (f.out.empty()) return;
    std::ofstream out(f.out);
    if (!out) throw resdeloc::ConfigError("cannot open output file " + f.out);
    if (f.format == "csv") {
        out << resdeloc::rows_to_csv(rec.rows);
        return;
    }
    for (const auto& r : rec.rows) {
        json row{{"experiment", experiment}};
        for (const auto& [k, v] : r.items()) row[k] = v;
        out << row.dump() << '\n';
    }
}

void print_table(const resdeloc::RunRecord& rec) {
    for (const auto& c : rec.checks)
        std::cerr << (c.pass ? "PASS " : "FAIL ") << c.name << "  value=" << c.value << "  threshold=" << c.threshold
                  << (c.detail.empty() ? "" : "  (" + c.detail + ")") << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo experiments for the random Schrodinger operator on the complete graph"};
    app.require_subcommand(1);
    Flags flags;
    for (const auto& name : resdeloc::experiment_names()) add_common(app.add_subcommand(name, "run " + name), flags);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    const std::string name = app.get_subcommands().front()->get_name();
    try {
        resdeloc::ExperimentConfig cfg = build_config(name, flags);
        resdeloc::RunRecord rec = resdeloc::run_experiment(cfg);
        write_rows(rec, name, flags);
        std::cout << rec.to_json().dump(2) << '\n';
        print_table(rec);
        return rec.passed() ? 0 : 1;
    } catch (const resdeloc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const resdeloc::RegimeError& e) {
        std::cerr << "regime error: " << e.what() << '\n';
        return 2;
    } catch (const resdeloc::DomainError& e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
