#include "signlab/experiments.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "signlab/rng.hpp"
#include "signlab/sph_basis.hpp"

#include <json.hpp>

namespace signlab {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr const char* kLibVersion = "0.1.0";
constexpr int kSchemaVersion = 1;
constexpr int kBatch = 64;  // replicate batch for the GEMM path; fixed so the
                            // matrix shapes (hence results) never depend on
                            // the worker count

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

struct CapRule {
    std::vector<Vec3> nodes;
    std::vector<double> weights;
    double weight_sum = 0.0;
};

// product quadrature around the north pole, sized to the oscillation rate
CapRule polar_cap_rule(double r, int ell) {
    const double rl = r * ell;
    const int radial = std::max(24, (int)std::ceil(3.0 * rl) + 16);
    const int azim = std::max(32, (int)std::ceil(4.0 * rl) + 16);
    const Cap cap = make_cap(Vec3{0.0, 0.0, 1.0}, r, radial, azim);
    CapRule rule;
    rule.nodes = cap.nodes;
    rule.weights = cap.weights;
    for (double w : rule.weights) rule.weight_sum += w;
    return rule;
}

// mean and variance in replicate order (two-pass, compensated)
void mean_var(const std::vector<double>& xs, double& mean, double& var) {
    double acc = 0.0, comp = 0.0;
    for (double x : xs) {
        const double y = x - comp;
        const double t = acc + y;
        comp = (t - acc) - y;
        acc = t;
    }
    mean = acc / (double)xs.size();
    acc = comp = 0.0;
    for (double x : xs) {
        const double d = (x - mean) * (x - mean);
        const double y = d - comp;
        const double t = acc + y;
        comp = (t - acc) - y;
        acc = t;
    }
    var = xs.size() > 1 ? acc / ((double)xs.size() - 1.0) : 0.0;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * ((double)sorted.size() - 1.0);
    const size_t lo = (size_t)std::floor(pos);
    const size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double f = pos - (double)lo;
    return (1.0 - f) * sorted[lo] + f * sorted[hi];
}

}  // namespace

void parallel_for(int n_tasks, int workers, const std::function<void(int)>& fn) {
    workers = std::max(1, std::min(workers, n_tasks));
    if (workers == 1) {
        for (int i = 0; i < n_tasks; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors((size_t)workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (;;) {
                    const int i = next.fetch_add(1);
                    if (i >= n_tasks) break;
                    fn(i);
                }
            } catch (...) {
                errors[(size_t)w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// --- config -------------------------------------------------------------

int ExperimentConfig::eta_for(int ell) const {
    int eta;
    if (eta_rule == "fixed") {
        eta = (int)eta_value;
    } else if (eta_rule == "sqrt") {
        eta = (int)std::floor(std::sqrt((double)ell));
    } else if (eta_rule == "frac") {
        eta = (int)std::floor(eta_value * ell);
    } else {
        throw std::invalid_argument("eta_rule must be fixed, sqrt, or frac");
    }
    return std::clamp(eta, 1, ell);
}

double ExperimentConfig::radius_for(int ell, double mult) const {
    if (r_rule == "ell-mult") return mult / (double)ell;
    const CriticalRadii cr = critical_radii(d, ell, eta_for(ell));
    if (r_rule == "rbar-mult") return mult * cr.r_bar;
    if (r_rule == "runder-mult") return mult * cr.r_under;
    throw std::invalid_argument("r_rule must be ell-mult, rbar-mult, or runder-mult");
}

std::string ExperimentConfig::to_json_string() const {
    nlohmann::json j = {{"experiment", experiment},
                        {"d", d},
                        {"ell_grid", ell_grid},
                        {"eta_rule", eta_rule},
                        {"eta_value", eta_value},
                        {"r_rule", r_rule},
                        {"r_mults", r_mults},
                        {"u_list", u_list},
                        {"eps_list", eps_list},
                        {"replicates", replicates},
                        {"seed", seed},
                        {"workers", workers},
                        {"out", out_path},
                        {"format", format},
                        {"plot", plot},
                        {"net_delta", net_delta},
                        {"grid_theta_cap", grid_theta_cap}};
    return j.dump();
}

void ExperimentConfig::apply_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j[key].get<std::decay_t<decltype(field)>>();
    };
    get("experiment", experiment);
    get("d", d);
    get("ell_grid", ell_grid);
    get("eta_rule", eta_rule);
    get("eta_value", eta_value);
    get("r_rule", r_rule);
    get("r_mults", r_mults);
    get("u_list", u_list);
    get("eps_list", eps_list);
    get("replicates", replicates);
    get("seed", seed);
    get("workers", workers);
    get("out", out_path);
    get("format", format);
    get("plot", plot);
    get("net_delta", net_delta);
    get("grid_theta_cap", grid_theta_cap);
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config file not readable: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    ExperimentConfig cfg;
    cfg.apply_json(ss.str());
    return cfg;
}

std::uint64_t ExperimentConfig::config_hash() const { return fnv1a(to_json_string()); }

// --- fits -----------------------------------------------------------------

FitResult fit_linear(const std::vector<double>& xs, const std::vector<double>& ys) {
    FitResult fit;
    if (xs.size() != ys.size() || xs.size() < 2) {
        fit.error = "fit requires at least two points";
        return fit;
    }
    double distinct = 0.0;
    for (size_t i = 1; i < xs.size(); ++i) distinct = std::max(distinct, std::abs(xs[i] - xs[0]));
    if (distinct == 0.0) {
        fit.error = "fit requires at least two distinct x values";
        return fit;
    }
    const double n = (double)xs.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double denom = n * sxx - sx * sx;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss_res = 0.0, ss_tot = 0.0;
    const double ybar = sy / n;
    for (size_t i = 0; i < xs.size(); ++i) {
        const double pred = fit.slope * xs[i] + fit.intercept;
        ss_res += (ys[i] - pred) * (ys[i] - pred);
        ss_tot += (ys[i] - ybar) * (ys[i] - ybar);
        fit.points.emplace_back(xs[i], ys[i]);
    }
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    fit.slope_stderr =
        xs.size() > 2 ? std::sqrt(ss_res / (n - 2.0) / (sxx - sx * sx / n)) : 0.0;
    fit.ok = true;
    return fit;
}

FitResult fit_loglog(const std::vector<double>& xs, const std::vector<double>& ys) {
    std::vector<double> lx, ly;
    for (size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] <= 0.0 || ys[i] <= 0.0) continue;
        lx.push_back(std::log(xs[i]));
        ly.push_back(std::log(ys[i]));
    }
    return fit_linear(lx, ly);
}

// --- tables and emission ------------------------------------------------------

void Table::add_row(std::initializer_list<std::string> cells) { rows.emplace_back(cells); }

std::string Table::to_csv() const {
    std::ostringstream os;
    for (size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << "\n";
    }
    return os.str();
}

Table parse_csv(const std::string& text) {
    Table t;
    std::istringstream is(text);
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (first) {
            t.columns = cells;
            first = false;
        } else {
            t.rows.push_back(cells);
        }
    }
    return t;
}

void emit(const Table& table, const ExperimentConfig& cfg, const std::string& base_path,
          const std::string& format, bool plot) {
    if (base_path.empty()) throw std::invalid_argument("emit: output path is empty");
    const std::string csv_path = base_path + ".csv";
    const std::string json_path = base_path + ".json";
    if (format == "csv" || plot) {
        std::ofstream out(csv_path);
        if (!out) throw std::runtime_error("emit: cannot open " + csv_path);
        out << table.to_csv();
    }
    if (format == "json") {
        nlohmann::json j;
        j["schema_version"] = kSchemaVersion;
        j["config"] = nlohmann::json::parse(cfg.to_json_string());
        const auto& bc = frozen_barrier_constants();
        j["manifest"] = {{"config_hash", cfg.config_hash()},
                         {"library_version", kLibVersion},
                         {"constants_hash",
                          fnv1a(fmt(bc.t0) + fmt(bc.eps0) + fmt(bc.c_construct) + fmt(bc.c_norm))}};
        j["columns"] = table.columns;
        j["rows"] = table.rows;
        std::ofstream out(json_path);
        if (!out) throw std::runtime_error("emit: cannot open " + json_path);
        out << j.dump(2) << "\n";
    }
    if (plot) {
        const std::string gp_path = base_path + ".gp";
        std::ofstream out(gp_path);
        if (!out) throw std::runtime_error("emit: cannot open " + gp_path);
        const size_t slash = csv_path.find_last_of('/');
        const std::string rel = slash == std::string::npos ? csv_path : csv_path.substr(slash + 1);
        out << "set datafile separator ','\n";
        out << "set key autotitle columnhead\n";
        out << "set logscale xy\n";
        out << "plot '" << rel << "' using 1:2 with linespoints\n";
    }
}

void wilson_interval(std::int64_t successes, std::int64_t total, double& lo, double& hi) {
    if (total <= 0) {
        lo = hi = 0.0;
        return;
    }
    const double z = 1.959963984540054;  // 97.5% quantile
    const double n = (double)total;
    const double p = (double)successes / n;
    const double denom = 1.0 + z * z / n;
    const double center = (p + z * z / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
    lo = std::max(0.0, center - half);
    hi = std::min(1.0, center + half);
}

// --- grid scan engine -------------------------------------------------------

SphereGridScan::SphereGridScan(const KernelSpec& spec, int n_theta)
    : spec_(spec), n_theta_(n_theta), n_phi_(2 * n_theta) {
    if (spec.d != 2) throw std::invalid_argument("SphereGridScan: d = 2 only");
    if (n_theta < 8) throw std::invalid_argument("SphereGridScan: grid too coarse");
    m_count_ = spec.ell + 1;
    const int l0 = spec.ell - spec.eta + 1, l1 = spec.ell;
    int tbl_stride = 0;
    for (int l = l0; l <= l1; ++l) tbl_stride += l + 1;
    table_.resize((size_t)n_theta_ * tbl_stride);
    sin_theta_.resize((size_t)n_theta_);
    const auto scales = band_degree_scales(spec);
    const double dth = kPi / n_theta_;
    std::vector<double> packed;
    constexpr double sqrt2 = 1.4142135623730951;
    for (int i = 0; i < n_theta_; ++i) {
        const double theta = (i + 0.5) * dth;
        sin_theta_[(size_t)i] = std::sin(theta);
        normalized_legendre_table(l1, std::cos(theta), std::sin(theta), packed);
        double* row = table_.data() + (size_t)i * tbl_stride;
        int idx = 0;
        for (int l = l0; l <= l1; ++l) {
            const double s = scales[(size_t)(l - l0)];
            row[idx++] = s * packed[packed_index(l, 0)];
            for (int m = 1; m <= l; ++m) row[idx++] = sqrt2 * s * packed[packed_index(l, m)];
        }
    }
    cos_table_.resize((size_t)m_count_ * n_phi_);
    sin_table_.resize((size_t)m_count_ * n_phi_);
    const double dph = 2.0 * kPi / n_phi_;
    for (int m = 0; m < m_count_; ++m)
        for (int j = 0; j < n_phi_; ++j) {
            const double a = m * (j + 0.5) * dph;
            cos_table_[(size_t)m * n_phi_ + j] = std::cos(a);
            sin_table_[(size_t)m * n_phi_ + j] = std::sin(a);
        }
}

void SphereGridScan::synthesize(const double* coeffs, std::vector<double>& field) const {
    const int l0 = spec_.ell - spec_.eta + 1, l1 = spec_.ell;
    int tbl_stride = 0;
    for (int l = l0; l <= l1; ++l) tbl_stride += l + 1;
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n_theta_, m_count_);
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n_theta_, m_count_);
    for (int i = 0; i < n_theta_; ++i) {
        const double* row = table_.data() + (size_t)i * tbl_stride;
        int ti = 0;   // index into the row table
        int ci = 0;   // index into the coefficient vector
        for (int l = l0; l <= l1; ++l) {
            C(i, 0) += row[ti] * coeffs[ci];
            ++ti;
            ++ci;
            for (int m = 1; m <= l; ++m) {
                C(i, m) += row[ti] * coeffs[ci];
                S(i, m) += row[ti] * coeffs[ci + 1];
                ++ti;
                ci += 2;
            }
        }
    }
    field.resize((size_t)n_theta_ * n_phi_);
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        cosM(cos_table_.data(), m_count_, n_phi_);
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        sinM(sin_table_.data(), m_count_, n_phi_);
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> F(
        field.data(), n_theta_, n_phi_);
    F.noalias() = C * cosM;
    F.noalias() += S * sinM;
}

SphereGridScan::Best SphereGridScan::scan(const std::vector<double>& field, double u, double r,
                                          double center_spacing) const {
    const double dth = kPi / n_theta_;
    const double dph = 2.0 * kPi / n_phi_;
    const double tau_u = tau(u);

    // per-row prefix sums of sin(theta) H(f - u)
    std::vector<double> prefix((size_t)n_theta_ * (n_phi_ + 1));
    for (int i = 0; i < n_theta_; ++i) {
        const double w = sin_theta_[(size_t)i];
        const double* frow = field.data() + (size_t)i * n_phi_;
        double* prow = prefix.data() + (size_t)i * (n_phi_ + 1);
        prow[0] = 0.0;
        for (int j = 0; j < n_phi_; ++j)
            prow[j + 1] = prow[j] + (frow[j] >= u ? w : -w);
    }
    auto cell_value = [&](int i, int k) {
        const double* frow = field.data() + (size_t)i * n_phi_;
        return frow[k] >= u ? sin_theta_[(size_t)i] : -sin_theta_[(size_t)i];
    };
    // fractional-window sum over columns [a, b] of row i, 0 <= a <= b <= n_phi
    auto seg_sum = [&](int i, double a, double b) {
        const double* prow = prefix.data() + (size_t)i * (n_phi_ + 1);
        int ka = (int)std::floor(a), kb = (int)std::floor(b);
        ka = std::clamp(ka, 0, n_phi_ - 1);
        kb = std::clamp(kb, 0, n_phi_);
        if (ka == kb || (kb == n_phi_ && ka == n_phi_ - 1 && b >= (double)n_phi_)) {
            if (kb == n_phi_) return (b - a) * cell_value(i, n_phi_ - 1);
            return (b - a) * cell_value(i, ka);
        }
        double acc = ((double)(ka + 1) - a) * cell_value(i, ka);
        acc += prow[std::min(kb, n_phi_)] - prow[ka + 1];
        if (kb < n_phi_) acc += (b - (double)kb) * cell_value(i, kb);
        return acc;
    };

    const int stride_t = std::max(1, (int)std::floor(center_spacing / dth));
    Best best;
    const double cos_r = std::cos(r);
    for (int ci = 0; ci < n_theta_; ci += stride_t) {
        const double theta_c = (ci + 0.5) * dth;
        const double sc = std::sin(theta_c), cc = std::cos(theta_c);
        const int stride_p =
            std::max(1, (int)std::floor(center_spacing / (dph * std::max(sc, dph))));
        const int row_lo = std::max(0, (int)std::floor((theta_c - r) / dth - 0.5));
        const int row_hi = std::min(n_theta_ - 1, (int)std::ceil((theta_c + r) / dth - 0.5));

        // per-row window half-width (in columns) and theta-coverage fraction
        struct RowWin {
            int i;
            double hw_cols;  // < 0 marks a full row
            double frac;
        };
        std::vector<RowWin> wins;
        wins.reserve((size_t)(row_hi - row_lo + 1));
        for (int i = row_lo; i <= row_hi; ++i) {
            const double t_lo = i * dth, t_hi = (i + 1) * dth;
            const double cover_lo = std::max(t_lo, theta_c - r);
            const double cover_hi = std::min(t_hi, theta_c + r);
            if (cover_hi <= cover_lo) continue;
            const double frac = (cover_hi - cover_lo) / dth;
            const double theta = (i + 0.5) * dth;
            const double st = sin_theta_[(size_t)i], ct = std::cos(theta);
            const double denom = st * sc;
            double hw;
            if (denom < 1e-300) {
                hw = (ct * cc >= cos_r) ? -1.0 : 0.0;
                if (hw == 0.0) continue;
            } else {
                const double cw = (cos_r - ct * cc) / denom;
                if (cw >= 1.0) continue;
                hw = (cw <= -1.0) ? -1.0 : std::acos(cw) / dph;
            }
            wins.push_back({i, hw, frac});
        }
        if (wins.empty()) continue;

        for (int cj = 0; cj < n_phi_; cj += stride_p) {
            const double xc = cj + 0.5;
            double hsum = 0.0, wsum = 0.0;
            for (const RowWin& rw : wins) {
                const double w_row = sin_theta_[(size_t)rw.i];
                if (rw.hw_cols < 0.0) {  // full row inside the cap
                    hsum += rw.frac * prefix[(size_t)rw.i * (n_phi_ + 1) + n_phi_];
                    wsum += rw.frac * w_row * n_phi_;
                    continue;
                }
                double lo = xc - rw.hw_cols, hi = xc + rw.hw_cols;
                double s;
                if (2.0 * rw.hw_cols >= (double)n_phi_) {
                    s = prefix[(size_t)rw.i * (n_phi_ + 1) + n_phi_];
                    wsum += rw.frac * w_row * n_phi_;
                } else {
                    // wrap into [0, n_phi)
                    if (lo < 0.0) {
                        s = seg_sum(rw.i, lo + n_phi_, (double)n_phi_) + seg_sum(rw.i, 0.0, hi);
                    } else if (hi > (double)n_phi_) {
                        s = seg_sum(rw.i, lo, (double)n_phi_) + seg_sum(rw.i, 0.0, hi - n_phi_);
                    } else {
                        s = seg_sum(rw.i, lo, hi);
                    }
                    wsum += rw.frac * w_row * 2.0 * rw.hw_cols;
                }
                hsum += rw.frac * s;
            }
            if (wsum <= 0.0) continue;
            const double b = std::abs(std::clamp(hsum / wsum, -1.0, 1.0) - tau_u);
            if (b > best.b) {
                best.b = b;
                best.row = ci;
                best.col = cj;
            }
        }
    }
    return best;
}

// --- variance ----------------------------------------------------------------

VarianceResult run_variance_scaling(const ExperimentConfig& cfg) {
    if (cfg.d != 2) throw std::invalid_argument("run_variance_scaling: d = 2 only (basis mode)");
    if (cfg.ell_grid.empty() || cfg.r_mults.empty())
        throw std::invalid_argument("run_variance_scaling: empty grid");
    VarianceResult result;
    result.low_replicates_warning = cfg.replicates < 200;

    for (int ell : cfg.ell_grid) {
        const KernelSpec spec(2, ell, cfg.eta_for(ell));
        std::map<double, std::vector<double>> xs_per_u, ys_per_u;
        for (double mult : cfg.r_mults) {
            const double r = cfg.radius_for(ell, mult);
            if (r <= 0.0 || r >= kPi)
                throw std::invalid_argument("run_variance_scaling: radius out of (0, pi)");
            const CapRule rule = polar_cap_rule(r, ell);
            const BandEvaluator eval(spec, rule.nodes);
            const int nb = eval.coeff_count();
            const int nn = eval.point_count();
            const int n_batches = (cfg.replicates + kBatch - 1) / kBatch;

            std::vector<std::vector<double>> d_per_u(cfg.u_list.size(),
                                                     std::vector<double>((size_t)cfg.replicates));
            parallel_for(n_batches, cfg.workers, [&](int batch) {
                const int rep0 = batch * kBatch;
                const int cols = std::min(kBatch, cfg.replicates - rep0);
                std::vector<double> coeffs((size_t)nb * kBatch);
                std::vector<double> values((size_t)nn * kBatch);
                for (int c = 0; c < cols; ++c) {
                    PhiloxRng rng(cfg.seed, (std::uint64_t)(rep0 + c));
                    for (int k = 0; k < nb; ++k) coeffs[(size_t)c * nb + k] = rng.normal();
                }
                eval.evaluate_batch(coeffs.data(), cols, values.data());
                for (int c = 0; c < cols; ++c) {
                    const double* v = values.data() + (size_t)c * nn;
                    for (size_t ui = 0; ui < cfg.u_list.size(); ++ui) {
                        const double u = cfg.u_list[ui];
                        double acc = 0.0;
                        for (int k = 0; k < nn; ++k)
                            acc += rule.weights[(size_t)k] * sign_h(v[k] - u);
                        d_per_u[ui][(size_t)(rep0 + c)] = acc / rule.weight_sum - tau(u);
                    }
                }
            });

            for (size_t ui = 0; ui < cfg.u_list.size(); ++ui) {
                VarianceRow row;
                row.ell = ell;
                row.r = r;
                row.r_ell = r * ell;
                row.u = cfg.u_list[ui];
                row.replicates = cfg.replicates;
                mean_var(d_per_u[ui], row.mean, row.variance);
                result.rows.push_back(row);
                xs_per_u[row.u].push_back(row.r_ell);
                ys_per_u[row.u].push_back(row.variance);
            }
        }
        for (auto& [u, xs] : xs_per_u) {
            FitResult fit = fit_loglog(xs, ys_per_u[u]);
            if (!fit.ok && result.fit_per_u.find(u) == result.fit_per_u.end())
                fit.error = "degenerate r grid: " + fit.error;
            result.fit_per_u[u] = fit;
        }
    }
    return result;
}

Table VarianceResult::table() const {
    Table t;
    t.columns = {"ell", "r", "r_ell", "u", "mean", "variance", "replicates"};
    for (const auto& r : rows)
        t.add_row({std::to_string(r.ell), fmt(r.r), fmt(r.r_ell), fmt(r.u), fmt(r.mean),
                   fmt(r.variance), std::to_string(r.replicates)});
    return t;
}

// --- concentration -------------------------------------------------------------

ConcentrationResult run_concentration(const ExperimentConfig& cfg) {
    if (cfg.d != 2) throw std::invalid_argument("run_concentration: d = 2 only");
    if (cfg.eps_list.empty()) throw std::invalid_argument("run_concentration: empty eps list");
    for (double e : cfg.eps_list)
        if (e <= 0.0) throw std::invalid_argument("run_concentration: eps must be positive");
    ConcentrationResult result;

    for (int ell : cfg.ell_grid) {
        const int eta = cfg.eta_for(ell);
        const KernelSpec spec(2, ell, eta);
        // (u, eps) -> per-point data of the fit
        std::map<std::pair<double, double>, std::pair<std::vector<double>, std::vector<double>>>
            fit_data;
        for (double mult : cfg.r_mults) {
            const double r = cfg.radius_for(ell, mult);
            const CapRule rule = polar_cap_rule(r, ell);
            const BandEvaluator eval(spec, rule.nodes);
            const int nb = eval.coeff_count();
            const int nn = eval.point_count();
            const int n_batches = (cfg.replicates + kBatch - 1) / kBatch;

            std::vector<std::vector<double>> d_per_u(cfg.u_list.size(),
                                                     std::vector<double>((size_t)cfg.replicates));
            parallel_for(n_batches, cfg.workers, [&](int batch) {
                const int rep0 = batch * kBatch;
                const int cols = std::min(kBatch, cfg.replicates - rep0);
                std::vector<double> coeffs((size_t)nb * kBatch);
                std::vector<double> values((size_t)nn * kBatch);
                for (int c = 0; c < cols; ++c) {
                    PhiloxRng rng(cfg.seed, (std::uint64_t)(rep0 + c));
                    for (int k = 0; k < nb; ++k) coeffs[(size_t)c * nb + k] = rng.normal();
                }
                eval.evaluate_batch(coeffs.data(), cols, values.data());
                for (int c = 0; c < cols; ++c) {
                    const double* v = values.data() + (size_t)c * nn;
                    for (size_t ui = 0; ui < cfg.u_list.size(); ++ui) {
                        const double u = cfg.u_list[ui];
                        double acc = 0.0;
                        for (int k = 0; k < nn; ++k)
                            acc += rule.weights[(size_t)k] * sign_h(v[k] - u);
                        d_per_u[ui][(size_t)(rep0 + c)] = acc / rule.weight_sum - tau(u);
                    }
                }
            });

            for (size_t ui = 0; ui < cfg.u_list.size(); ++ui) {
                for (double eps : cfg.eps_list) {
                    ConcentrationRow row;
                    row.ell = ell;
                    row.r = r;
                    row.r_ell = r * ell;
                    row.u = cfg.u_list[ui];
                    row.eps = eps;
                    row.total = cfg.replicates;
                    std::int64_t upper = 0;
                    for (double dval : d_per_u[ui]) {
                        if (std::abs(dval) > eps) ++row.exceed;
                        if (dval > eps) ++upper;
                    }
                    row.p_hat = (double)row.exceed / (double)row.total;
                    row.p_hat_upper = (double)upper / (double)row.total;
                    wilson_interval(row.exceed, row.total, row.wilson_lo, row.wilson_hi);
                    row.excluded = row.exceed == 0;
                    row.neg_log_p = row.excluded ? 0.0 : -std::log(row.p_hat);
                    if (!row.excluded) {
                        auto& [xs, ys] = fit_data[{row.u, eps}];
                        xs.push_back(std::pow(row.r_ell, cfg.d - 1.0) *
                                     std::max(1.0, row.r * eta));
                        ys.push_back(row.neg_log_p);
                    }
                    result.rows.push_back(row);
                }
            }
        }
        for (auto& [key, data] : fit_data) result.fits[key] = fit_linear(data.first, data.second);
    }
    return result;
}

Table ConcentrationResult::table() const {
    Table t;
    t.columns = {"ell",       "r",         "r_ell",     "u",        "eps",
                 "exceed",    "total",     "p_hat",     "wilson_lo", "wilson_hi",
                 "neg_log_p", "p_hat_upper", "excluded"};
    for (const auto& r : rows)
        t.add_row({std::to_string(r.ell), fmt(r.r), fmt(r.r_ell), fmt(r.u), fmt(r.eps),
                   std::to_string(r.exceed), std::to_string(r.total), fmt(r.p_hat),
                   fmt(r.wilson_lo), fmt(r.wilson_hi), fmt(r.neg_log_p), fmt(r.p_hat_upper),
                   r.excluded ? "1" : "0"});
    return t;
}

// --- imbalance scan -------------------------------------------------------------

ImbalanceResult2 run_imbalance_scan(const ExperimentConfig& cfg) {
    if (cfg.d != 2) throw std::invalid_argument("run_imbalance_scan: d = 2 only");
    ImbalanceResult2 result;
    const double u = cfg.u_list.empty() ? 0.0 : cfg.u_list.front();

    std::vector<const char*> scales;
    if (cfg.r_rule == "rbar-mult") {
        scales = {"rbar"};
    } else if (cfg.r_rule == "runder-mult") {
        scales = {"runder"};
    } else {
        scales = {"rbar", "runder"};
    }
    for (int ell : cfg.ell_grid) {
        const int eta = cfg.eta_for(ell);
        const KernelSpec spec(2, ell, eta);
        const CriticalRadii cr = critical_radii(2, ell, eta);
        for (const char* scale : scales) {
            const double base = std::string(scale) == "rbar" ? cr.r_bar : cr.r_under;
            for (double mu : cfg.r_mults) {
                const double r = mu * base;
                if (r <= 0.0 || r >= kPi) continue;
                ImbalanceRow row;
                row.ell = ell;
                row.mu = mu;
                row.scale = scale;
                row.r = r;
                row.replicates = cfg.replicates;

                // the grid must resolve both the net spacing delta r and the
                // field wavelength 2 pi / ell (6 cells per wavelength), or the
                // cap averages pick up ell-dependent sampling noise
                const int wanted =
                    std::max((int)std::ceil(kPi / (cfg.net_delta * r)), 3 * ell);
                const int n_theta = std::clamp(wanted, 64, cfg.grid_theta_cap);
                row.grid_capped = n_theta < wanted;
                row.delta_eff = kPi / ((double)n_theta * r);
                const SphereGridScan engine(spec, n_theta);
                const int nb = basis_size(ell - eta + 1, ell);

                std::vector<double> b_vals((size_t)cfg.replicates);
                parallel_for(cfg.replicates, cfg.workers, [&](int rep) {
                    PhiloxRng rng(cfg.seed, (std::uint64_t)rep);
                    std::vector<double> coeffs((size_t)nb);
                    for (auto& c : coeffs) c = rng.normal();
                    std::vector<double> field;
                    engine.synthesize(coeffs.data(), field);
                    b_vals[(size_t)rep] = engine.scan(field, u, r, row.delta_eff * r).b;
                });

                double mean, var;
                mean_var(b_vals, mean, var);
                row.b_mean = mean;
                std::vector<double> sorted = b_vals;
                std::sort(sorted.begin(), sorted.end());
                row.b_q10 = quantile_sorted(sorted, 0.1);
                row.b_q90 = quantile_sorted(sorted, 0.9);
                result.rows.push_back(row);
            }
        }
    }
    return result;
}

Table ImbalanceResult2::table() const {
    Table t;
    t.columns = {"ell", "mu", "scale", "r", "b_mean", "b_q10", "b_q90", "delta_eff",
                 "grid_capped", "replicates"};
    for (const auto& r : rows)
        t.add_row({std::to_string(r.ell), fmt(r.mu), r.scale, fmt(r.r), fmt(r.b_mean),
                   fmt(r.b_q10), fmt(r.b_q90), fmt(r.delta_eff), r.grid_capped ? "1" : "0",
                   std::to_string(r.replicates)});
    return t;
}

// --- barrier demo ----------------------------------------------------------------

BarrierDemoReport run_barrier_demo(const ExperimentConfig& cfg) {
    BarrierDemoReport rep;
    rep.constants = frozen_barrier_constants();
    rep.ell = cfg.ell_grid.empty() ? 600 : cfg.ell_grid.front();
    const int eta = cfg.eta_for(rep.ell);
    const double T = (double)rep.ell;
    const double C = rep.constants.c_construct;
    rep.r = 0.8 / (C * std::sqrt(T));

    const Vec3 pole{0.0, 0.0, 1.0};
    const BarrierFunction h = sphere_sign_barrier(pole, rep.r, rep.ell, eta, C);
    rep.barrier = h;
    const Cap cap = make_cap(pole, rep.r, 64);
    rep.bias_level = rep.constants.eps0;
    rep.bias = volume_bias([&](const Vec3& y) { return h.evaluate(y); }, cap, rep.bias_level)
                   .d_tilde;
    rep.bias_ok = rep.bias > rep.constants.eps0;
    const double norm = rkhs_norm(h);
    rep.norm_sq = norm * norm;
    rep.norm_bound = rep.constants.c_norm * std::max(1.0, rep.r * eta) * (rep.r * T) * (rep.r * T);
    rep.norm_ok = rep.norm_sq <= rep.norm_bound;

    // appendix-A sequence at r = 1.7
    const double xr = 1.7;
    const XiProfile prof = xi_profile(xr);
    rep.xi_r = xr;
    rep.xi_k = prof.k;
    rep.xi_s = prof.s;
    PhiloxRng rng(cfg.seed, 0xA11A);
    for (int i = 0; i < 20; ++i) {
        const double ang = 2.0 * kPi * rng.uniform();
        const double rad = 5.0 * std::sqrt(rng.uniform());
        const double v = std::abs(
            xi_integral(prof, rad * std::cos(ang), rad * std::sin(ang), 1.0));
        rep.zero_integral_max = std::max(rep.zero_integral_max, v);
    }
    rep.r_integral = xi_integral(prof, 0.0, 0.0, xr);
    rep.r_integral_exact = xi_integral_centered_exact(prof, xr);

    const DensityField dens(prof, 64.0);
    double worst1 = 0.0;
    for (int i = 0; i < 10; ++i) {
        const double ang = 2.0 * kPi * rng.uniform();
        const double rad = 5.0 * std::sqrt(rng.uniform());
        worst1 = std::max(worst1,
                          std::abs(dens.defect_on_disc(rad * std::cos(ang),
                                                       rad * std::sin(ang), 1.0)));
    }
    rep.density_defect_r1 = worst1;
    rep.density_defect_rr = dens.defect_on_disc(0.0, 0.0, xr);
    rep.density_defect_expected = rep.r_integral_exact / (kPi * xr * xr);
    return rep;
}

std::string BarrierDemoReport::to_json_string() const {
    nlohmann::json centers = nlohmann::json::array();
    for (const Vec3& c : barrier.centers) centers.push_back({c[0], c[1], c[2]});
    nlohmann::json j = {{"ell", ell},
                        {"r", r},
                        {"barrier",
                         {{"centers", centers},
                          {"weights", barrier.weights},
                          {"ell", barrier.ell},
                          {"eta", barrier.eta},
                          {"eta_prime", barrier.eta_prime},
                          {"s", barrier.scale},
                          {"r_tilde", barrier.r_tilde}}},
                        {"bias", bias},
                        {"bias_level", bias_level},
                        {"bias_ok", bias_ok},
                        {"norm_sq", norm_sq},
                        {"norm_bound", norm_bound},
                        {"norm_ok", norm_ok},
                        {"constants",
                         {{"t0", constants.t0},
                          {"eps0", constants.eps0},
                          {"c_construct", constants.c_construct},
                          {"c_norm", constants.c_norm}}},
                        {"appendix_a",
                         {{"r", xi_r},
                          {"k", xi_k},
                          {"s", xi_s},
                          {"zero_integral_max", zero_integral_max},
                          {"r_integral", r_integral},
                          {"r_integral_exact", r_integral_exact},
                          {"density_defect_r1", density_defect_r1},
                          {"density_defect_rr", density_defect_rr},
                          {"density_defect_expected", density_defect_expected}}}};
    return j.dump(2);
}

Table BarrierDemoReport::table() const {
    Table t;
    t.columns = {"quantity", "value"};
    t.add_row({"ell", std::to_string(ell)});
    t.add_row({"r", fmt(r)});
    t.add_row({"bias", fmt(bias)});
    t.add_row({"bias_level_eps0", fmt(bias_level)});
    t.add_row({"bias_ok", bias_ok ? "1" : "0"});
    t.add_row({"norm_sq", fmt(norm_sq)});
    t.add_row({"norm_bound", fmt(norm_bound)});
    t.add_row({"norm_ok", norm_ok ? "1" : "0"});
    t.add_row({"xi_k", std::to_string(xi_k)});
    t.add_row({"xi_s", fmt(xi_s)});
    t.add_row({"zero_integral_max", fmt(zero_integral_max)});
    t.add_row({"r_integral", fmt(r_integral)});
    t.add_row({"r_integral_exact", fmt(r_integral_exact)});
    t.add_row({"density_defect_r1", fmt(density_defect_r1)});
    t.add_row({"density_defect_rr", fmt(density_defect_rr)});
    t.add_row({"density_defect_expected", fmt(density_defect_expected)});
    return t;
}

}  // namespace signlab
