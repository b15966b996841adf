// Command-line driver: kernel checks, sampling, defect/imbalance evaluation,
// and the Monte Carlo experiments. Exit codes: 0 success, 2 configuration
// error, 3 numerical failure.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "signlab/experiments.hpp"

namespace {

using namespace signlab;

void add_common(CLI::App* cmd, ExperimentConfig& cfg, std::string& config_path) {
    cmd->add_option("--config", config_path, "JSON config file (flags override file values)");
    cmd->add_option("--d", cfg.d, "sphere dimension");
    cmd->add_option("--ell", cfg.ell_grid, "degree grid");
    cmd->add_option("--eta", cfg.eta_value, "band width (eta rule: fixed)");
    cmd->add_option("--eta-rule", cfg.eta_rule, "fixed | sqrt | frac");
    cmd->add_option("--u", cfg.u_list, "levels");
    cmd->add_option("--r-mult", cfg.r_mults, "radius multipliers (see --r-rule)");
    cmd->add_option("--r-rule", cfg.r_rule, "ell-mult | rbar-mult | runder-mult");
    cmd->add_option("--mu", cfg.r_mults, "alias of --r-mult for the imbalance scan");
    cmd->add_option("--eps", cfg.eps_list, "deviation thresholds");
    cmd->add_option("--replicates", cfg.replicates, "Monte Carlo replicates");
    cmd->add_option("--seed", cfg.seed, "base seed");
    cmd->add_option("--workers", cfg.workers, "worker threads");
    cmd->add_option("--out", cfg.out_path, "output base path (writes <out>.csv/.json)");
    cmd->add_option("--format", cfg.format, "csv | json");
    cmd->add_flag("--plot", cfg.plot, "emit a gnuplot script next to the CSV");
    cmd->add_option("--net-delta", cfg.net_delta, "net spacing as a fraction of r");
}

ExperimentConfig merge_config(const ExperimentConfig& flags, const std::string& config_path,
                              CLI::App* cmd) {
    if (config_path.empty()) return flags;
    ExperimentConfig cfg = ExperimentConfig::from_json_file(config_path);
    // flags that were actually passed override the file
    ExperimentConfig merged = cfg;
    auto seen = [&](const std::string& name) { return cmd->count(name) > 0; };
    if (seen("--d")) merged.d = flags.d;
    if (seen("--ell")) merged.ell_grid = flags.ell_grid;
    if (seen("--eta")) merged.eta_value = flags.eta_value;
    if (seen("--eta-rule")) merged.eta_rule = flags.eta_rule;
    if (seen("--u")) merged.u_list = flags.u_list;
    if (seen("--r-mult") || seen("--mu")) merged.r_mults = flags.r_mults;
    if (seen("--r-rule")) merged.r_rule = flags.r_rule;
    if (seen("--eps")) merged.eps_list = flags.eps_list;
    if (seen("--replicates")) merged.replicates = flags.replicates;
    if (seen("--seed")) merged.seed = flags.seed;
    if (seen("--workers")) merged.workers = flags.workers;
    if (seen("--out")) merged.out_path = flags.out_path;
    if (seen("--format")) merged.format = flags.format;
    if (seen("--plot")) merged.plot = flags.plot;
    if (seen("--net-delta")) merged.net_delta = flags.net_delta;
    return merged;
}

void write_or_print(const Table& table, const ExperimentConfig& cfg) {
    if (cfg.out_path.empty()) {
        std::cout << table.to_csv();
    } else {
        emit(table, cfg, cfg.out_path, cfg.format, cfg.plot);
        std::cout << "wrote " << cfg.out_path << "." << cfg.format << "\n";
    }
}

int cmd_kernel_check(const ExperimentConfig& cfg) {
    Table t;
    t.columns = {"d", "ell", "eta", "theta", "kernel", "asymptotic_main", "envelope",
                 "rbar", "runder"};
    for (int ell : cfg.ell_grid) {
        const KernelSpec spec(cfg.d, ell, cfg.eta_for(ell));
        const CriticalRadii cr = critical_radii(cfg.d, ell, spec.eta);
        for (double mult : cfg.r_mults) {
            const double theta = cfg.radius_for(ell, mult);
            const double k = kernel_band(spec, theta);
            const KernelAsymptotic asy = kernel_asymptotic(spec, theta);
            std::ostringstream th, kv, mv, ev, rb, ru;
            th.precision(17); kv.precision(17); mv.precision(17);
            ev.precision(17); rb.precision(17); ru.precision(17);
            th << theta; kv << k; mv << asy.main; ev << asy.envelope;
            rb << cr.r_bar; ru << cr.r_under;
            t.add_row({std::to_string(cfg.d), std::to_string(ell), std::to_string(spec.eta),
                       th.str(), kv.str(), mv.str(), ev.str(), rb.str(), ru.str()});
        }
    }
    write_or_print(t, cfg);
    return 0;
}

int cmd_sample(const ExperimentConfig& cfg) {
    if (cfg.ell_grid.empty()) throw std::invalid_argument("sample: --ell required");
    const int ell = cfg.ell_grid.front();
    const FieldSample s = sample_band(ell, cfg.eta_for(ell), cfg.seed);
    if (cfg.out_path.empty()) throw std::invalid_argument("sample: --out required");
    export_sample(s, cfg.out_path, cfg.format);
    std::cout << "wrote " << cfg.out_path << " (" << s.coeffs.size() << " coefficients)\n";
    return 0;
}

int cmd_defect(const ExperimentConfig& cfg) {
    if (cfg.ell_grid.empty()) throw std::invalid_argument("defect: --ell required");
    const int ell = cfg.ell_grid.front();
    const KernelSpec spec(2, ell, cfg.eta_for(ell));
    Table t;
    t.columns = {"seed", "d", "ell", "eta", "u", "r", "d_tilde", "d_centred", "resolution"};
    for (double mult : cfg.r_mults.empty() ? std::vector<double>{8.0} : cfg.r_mults) {
        const double r = cfg.radius_for(ell, mult);
        const Cap c = make_cap(Vec3{0, 0, 1}, r, std::max(24, (int)(3.0 * r * ell) + 16));
        const FieldSample s = sample_band(ell, spec.eta, cfg.seed);
        const BandEvaluator eval(spec, c.nodes);
        std::vector<double> values((size_t)eval.point_count());
        eval.evaluate_all(s.coeffs.data(), values.data());
        for (double u : cfg.u_list) {
            const BiasReport rep = volume_bias_values(values, c, u);
            const std::string row = bias_report_csv_row(rep, cfg.seed, spec);
            std::vector<std::string> cells;
            std::istringstream is(row);
            std::string cell;
            while (std::getline(is, cell, ',')) cells.push_back(cell);
            t.rows.push_back(cells);
        }
    }
    write_or_print(t, cfg);
    return 0;
}

int cmd_imbalance(const ExperimentConfig& cfg) {
    auto result = run_imbalance_scan(cfg);
    write_or_print(result.table(), cfg);
    return 0;
}

int cmd_variance(const ExperimentConfig& cfg) {
    auto result = run_variance_scaling(cfg);
    if (result.low_replicates_warning)
        std::cerr << "warning: fewer than 200 replicates; variance estimates are noisy\n";
    Table t = result.table();
    for (const auto& [u, fit] : result.fit_per_u) {
        std::ostringstream note;
        note.precision(10);
        if (fit.ok)
            note << "fit u=" << u << ": slope=" << fit.slope << " r2=" << fit.r2;
        else
            note << "fit u=" << u << ": rejected (" << fit.error << ")";
        std::cerr << note.str() << "\n";
    }
    write_or_print(t, cfg);
    return 0;
}

int cmd_concentration(const ExperimentConfig& cfg) {
    auto result = run_concentration(cfg);
    for (const auto& [key, fit] : result.fits) {
        std::ostringstream note;
        note.precision(10);
        note << "fit u=" << key.first << " eps=" << key.second << ": ";
        if (fit.ok)
            note << "slope=" << fit.slope << " r2=" << fit.r2;
        else
            note << "rejected (" << fit.error << ")";
        std::cerr << note.str() << "\n";
    }
    write_or_print(result.table(), cfg);
    return 0;
}

int cmd_barrier(const ExperimentConfig& cfg, bool calibrate, const std::string& hex_curve_path) {
    if (calibrate) {
        calibrate_barrier_constants(true);
        return 0;
    }
    if (!hex_curve_path.empty()) {
        std::ofstream out(hex_curve_path);
        if (!out) throw std::runtime_error("cannot open " + hex_curve_path);
        out << "t,defect\n";
        out.precision(17);
        for (int i = 0; i <= 40; ++i) {
            const double t = 0.025 * i;
            out << t << "," << hex_defect(t, 256) << "\n";
        }
        std::cout << "wrote " << hex_curve_path << "\n";
    }
    const BarrierDemoReport rep = run_barrier_demo(cfg);
    if (!cfg.out_path.empty()) {
        std::ofstream out(cfg.out_path + ".json");
        if (!out) throw std::runtime_error("cannot open " + cfg.out_path + ".json");
        out << rep.to_json_string() << "\n";
        std::cout << "wrote " << cfg.out_path << ".json\n";
    } else {
        std::cout << rep.to_json_string() << "\n";
    }
    return rep.bias_ok && rep.norm_ok ? 0 : 3;
}

int cmd_appendix_a(const ExperimentConfig& cfg) {
    const BarrierDemoReport rep = run_barrier_demo(cfg);
    write_or_print(rep.table(), cfg);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"signlab: sign-balance laboratory for random spherical waves"};
    app.require_subcommand(1);

    signlab::ExperimentConfig cfg;
    std::string config_path;
    bool calibrate = false;
    std::string hex_curve_path;

    auto* kernel_check = app.add_subcommand("kernel-check", "kernel values and asymptotics");
    add_common(kernel_check, cfg, config_path);
    auto* sample = app.add_subcommand("sample", "draw and export one field sample");
    add_common(sample, cfg, config_path);
    auto* defect = app.add_subcommand("defect", "volume-bias of one sample on polar caps");
    add_common(defect, cfg, config_path);
    auto* imbalance = app.add_subcommand("imbalance", "net-approximated sign-imbalance scan");
    add_common(imbalance, cfg, config_path);
    auto* variance = app.add_subcommand("variance", "variance scaling experiment");
    add_common(variance, cfg, config_path);
    auto* concentration = app.add_subcommand("concentration", "tail probability experiment");
    add_common(concentration, cfg, config_path);
    auto* barrier = app.add_subcommand("barrier", "sign-barrier construction demo");
    add_common(barrier, cfg, config_path);
    barrier->add_flag("--calibrate", calibrate, "re-derive and print the frozen constants");
    barrier->add_option("--hex-curve", hex_curve_path, "write the (t, D(t)) CSV here");
    auto* appendix = app.add_subcommand("appendix-a", "radial-profile construction checks");
    add_common(appendix, cfg, config_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        CLI::App* active = app.get_subcommands().front();
        const signlab::ExperimentConfig merged = merge_config(cfg, config_path, active);
        if (kernel_check->parsed()) return cmd_kernel_check(merged);
        if (sample->parsed()) return cmd_sample(merged);
        if (defect->parsed()) return cmd_defect(merged);
        if (imbalance->parsed()) return cmd_imbalance(merged);
        if (variance->parsed()) return cmd_variance(merged);
        if (concentration->parsed()) return cmd_concentration(merged);
        if (barrier->parsed()) return cmd_barrier(merged, calibrate, hex_curve_path);
        if (appendix->parsed()) return cmd_appendix_a(merged);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
