#pragma once

// Monte Carlo reproduction of the variance, concentration, and imbalance
// scaling laws, plus the table/JSON/gnuplot emitters shared by the CLI.
// Replicate i always draws from RNG stream i, and aggregation runs in
// replicate order, so results are identical for any worker count.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "signlab/barriers.hpp"

namespace signlab {

struct ExperimentConfig {
    std::string experiment;
    int d = 2;
    std::vector<int> ell_grid;
    std::string eta_rule = "fixed";  // fixed | sqrt | frac
    double eta_value = 1.0;          // count for fixed, fraction of ell for frac
    std::string r_rule = "ell-mult";  // ell-mult | rbar-mult | runder-mult
    std::vector<double> r_mults;
    std::vector<double> u_list{0.0};
    std::vector<double> eps_list{0.2};
    int replicates = 200;
    std::uint64_t seed = 1;
    int workers = 1;
    std::string out_path;
    std::string format = "csv";
    bool plot = false;
    double net_delta = 0.05;    // grid spacing as a fraction of r in the scan
    int grid_theta_cap = 2048;  // hard cap on the scan grid rows

    int eta_for(int ell) const;
    double radius_for(int ell, double mult) const;
    std::string to_json_string() const;
    static ExperimentConfig from_json_file(const std::string& path);
    void apply_json(const std::string& json_text);  // file values; flags override after
    std::uint64_t config_hash() const;
};

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double r2 = 0.0;
    std::vector<std::pair<double, double>> points;  // the fitted (x, y) pairs
    bool ok = false;
    std::string error;
};

// Least squares y = a x + b over the given points; rejects < 2 distinct x.
FitResult fit_linear(const std::vector<double>& xs, const std::vector<double>& ys);
FitResult fit_loglog(const std::vector<double>& xs, const std::vector<double>& ys);

// Generic emitted table: fixed header line, stringified cells.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    void add_row(std::initializer_list<std::string> cells);
    std::string to_csv() const;
};

// Writes table.csv / table.json (schema + config + manifest) / optional
// table.gp gnuplot script referencing the CSV by relative path.
void emit(const Table& table, const ExperimentConfig& cfg, const std::string& base_path,
          const std::string& format, bool plot);

// parse a CSV produced by Table::to_csv back into a Table (round-trip checks)
Table parse_csv(const std::string& text);

// --- variance ---------------------------------------------------------------

struct VarianceRow {
    int ell = 0;
    double r = 0.0, r_ell = 0.0, u = 0.0;
    double mean = 0.0, variance = 0.0;
    int replicates = 0;
};
struct VarianceResult {
    std::vector<VarianceRow> rows;
    std::map<double, FitResult> fit_per_u;  // log Var vs log (r ell)
    bool low_replicates_warning = false;
    Table table() const;
};
VarianceResult run_variance_scaling(const ExperimentConfig& cfg);

// --- concentration ----------------------------------------------------------

struct ConcentrationRow {
    int ell = 0;
    double r = 0.0, r_ell = 0.0, u = 0.0, eps = 0.0;
    std::int64_t exceed = 0, total = 0;
    double p_hat = 0.0, wilson_lo = 0.0, wilson_hi = 0.0;
    double neg_log_p = 0.0;
    double p_hat_upper = 0.0;  // one-sided P(D > eps), both signs reported
    bool excluded = false;     // zero exceedances: dropped from the fit
};
struct ConcentrationResult {
    std::vector<ConcentrationRow> rows;
    // fits of -log p vs (r ell)^(d-1) max{1, r eta}, keyed by (u, eps)
    std::map<std::pair<double, double>, FitResult> fits;
    Table table() const;
};
ConcentrationResult run_concentration(const ExperimentConfig& cfg);

// Wilson score interval for a binomial proportion.
void wilson_interval(std::int64_t successes, std::int64_t total, double& lo, double& hi);

// --- imbalance scan ---------------------------------------------------------

struct ImbalanceRow {
    int ell = 0;
    double mu = 0.0;
    std::string scale;  // "rbar" or "runder"
    double r = 0.0;
    double b_mean = 0.0, b_q10 = 0.0, b_q90 = 0.0;
    double delta_eff = 0.0;  // realized grid spacing / r (after the grid cap)
    bool grid_capped = false;
    int replicates = 0;
};
struct ImbalanceResult2 {
    std::vector<ImbalanceRow> rows;
    Table table() const;
};
ImbalanceResult2 run_imbalance_scan(const ExperimentConfig& cfg);

// --- barrier demo -----------------------------------------------------------

struct BarrierDemoReport {
    BarrierConstants constants{};
    BarrierFunction barrier;  // the constructed sign-barrier itself
    int ell = 0;
    double r = 0.0;
    double bias = 0.0;       // D~_{h;eps0}(x;r)
    double bias_level = 0.0; // the level eps0 used
    double norm_sq = 0.0;
    double norm_bound = 0.0;  // c_norm max{1, r eta} (r T)^(2(d-1))
    bool bias_ok = false, norm_ok = false;
    // appendix-A section
    double xi_r = 0.0;
    int xi_k = 0;
    double xi_s = 0.0;
    double zero_integral_max = 0.0;   // max |int_{B_1(x)} xi| over random centers
    double r_integral = 0.0;          // quadrature of int_{B_r(0)} xi
    double r_integral_exact = 0.0;    // radial closed form
    double density_defect_r1 = 0.0;   // field defect at radius 1 (averaged centers)
    double density_defect_rr = 0.0;   // field defect at radius r, center 0
    double density_defect_expected = 0.0;  // xi integral / (pi r^2)
    std::string to_json_string() const;
    Table table() const;
};
BarrierDemoReport run_barrier_demo(const ExperimentConfig& cfg);

// --- shared internals exposed for tests --------------------------------------

// Evaluates band fields on an equiangular grid and scans cap averages of
// H(f - u) over all grid centers via per-row prefix sums.
class SphereGridScan {
public:
    SphereGridScan(const KernelSpec& spec, int n_theta);

    int n_theta() const { return n_theta_; }
    int n_phi() const { return n_phi_; }

    // field values on the grid for the given coefficient vector
    void synthesize(const double* coeffs, std::vector<double>& field) const;

    struct Best {
        double b = 0.0;
        int row = 0, col = 0;
    };
    // max over grid centers (subsampled to ~center_spacing) of
    // |cap-average of H(field - u) - tau(u)|
    Best scan(const std::vector<double>& field, double u, double r, double center_spacing) const;

private:
    KernelSpec spec_;
    int n_theta_ = 0, n_phi_ = 0;
    std::vector<double> table_;       // per-row scaled Legendre values
    std::vector<double> cos_table_;   // (ell+1) x n_phi
    std::vector<double> sin_table_;
    std::vector<double> sin_theta_;
    int m_count_ = 0;
};

// Runs fn(task) for task in [0, n) on `workers` threads.
void parallel_for(int n_tasks, int workers, const std::function<void(int)>& fn);

}  // namespace signlab
