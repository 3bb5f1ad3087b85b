#include "cmcs/cpa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cmcs/statsutil.hpp"

namespace cmcs {

namespace {

/// In-place lower Cholesky; returns false if the matrix is not PD.
bool try_cholesky(Matrix& a) {
    const std::size_t q = a.rows();
    for (std::size_t j = 0; j < q; ++j) {
        double diag = a(j, j);
        for (std::size_t k = 0; k < j; ++k) {
            diag -= a(j, k) * a(j, k);
        }
        if (diag <= 0.0) {
            return false;
        }
        a(j, j) = std::sqrt(diag);
        for (std::size_t i = j + 1; i < q; ++i) {
            double v = a(i, j);
            for (std::size_t k = 0; k < j; ++k) {
                v -= a(i, k) * a(j, k);
            }
            a(i, j) = v / a(j, j);
        }
    }
    return true;
}

/// Solve A x = b given the lower Cholesky factor of A.
std::vector<double> cholesky_solve(const Matrix& chol, const std::vector<double>& b) {
    const std::size_t q = chol.rows();
    std::vector<double> y(q);
    for (std::size_t i = 0; i < q; ++i) {
        double v = b[i];
        for (std::size_t k = 0; k < i; ++k) {
            v -= chol(i, k) * y[k];
        }
        y[i] = v / chol(i, i);
    }
    std::vector<double> x(q);
    for (std::size_t ii = q; ii-- > 0;) {
        double v = y[ii];
        for (std::size_t k = ii + 1; k < q; ++k) {
            v -= chol(k, ii) * x[k];
        }
        x[ii] = v / chol(ii, ii);
    }
    return x;
}

/// Smallest eigenvalue of a symmetric matrix via cyclic Jacobi sweeps; only
/// used to annotate non-PD failures, q is always small here.
double min_eigenvalue_sym(Matrix a) {
    const std::size_t q = a.rows();
    for (int sweep = 0; sweep < 50; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < q; ++i) {
            for (std::size_t j = i + 1; j < q; ++j) {
                off += a(i, j) * a(i, j);
            }
        }
        if (off < 1e-24) {
            break;
        }
        for (std::size_t pp = 0; pp < q; ++pp) {
            for (std::size_t qq = pp + 1; qq < q; ++qq) {
                if (std::fabs(a(pp, qq)) < 1e-300) {
                    continue;
                }
                const double theta = 0.5 * (a(qq, qq) - a(pp, pp)) / a(pp, qq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < q; ++k) {
                    const double akp = a(k, pp);
                    const double akq = a(k, qq);
                    a(k, pp) = c * akp - s * akq;
                    a(k, qq) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < q; ++k) {
                    const double apk = a(pp, k);
                    const double aqk = a(qq, k);
                    a(pp, k) = c * apk - s * aqk;
                    a(qq, k) = s * apk + c * aqk;
                }
            }
        }
    }
    double lmin = a(0, 0);
    for (std::size_t i = 1; i < q; ++i) {
        lmin = std::min(lmin, a(i, i));
    }
    return lmin;
}

Matrix autocovariance(const Matrix& z, const std::vector<double>& mean, std::size_t lag) {
    const std::size_t n = z.rows();
    const std::size_t q = z.cols();
    Matrix g(q, q);
    for (std::size_t t = lag; t < n; ++t) {
        for (std::size_t i = 0; i < q; ++i) {
            const double zi = z(t, i) - mean[i];
            for (std::size_t j = 0; j < q; ++j) {
                g(i, j) += zi * (z(t - lag, j) - mean[j]);
            }
        }
    }
    for (auto& v : g.data()) {
        v /= static_cast<double>(n);
    }
    return g;
}

}  // namespace

InstrumentSeries instrument(const std::vector<double>& d, const StateSeries& states) {
    if (d.size() != states.size()) {
        throw std::invalid_argument("instrument: differential length " + std::to_string(d.size()) +
                                    " != state series length " + std::to_string(states.size()));
    }
    const auto& alphabet = states.alphabet();
    const std::size_t q = alphabet.size();  // 1 constant + (d-1) indicators
    InstrumentSeries out;
    out.states = alphabet;
    out.z = Matrix(d.size(), q);
    for (std::size_t t = 0; t < d.size(); ++t) {
        out.z(t, 0) = d[t];
        for (std::size_t k = 0; k + 1 < q; ++k) {
            out.z(t, k + 1) = (states.labels()[t] == alphabet[k]) ? d[t] : 0.0;
        }
    }
    return out;
}

namespace {

/// Shared moment-matrix machinery: lag window plus PD repair. `centered`
/// subtracts the sample mean (the variance of z_t); the Wald statistic
/// instead Studentizes with the raw second-moment matrix, which estimates
/// the same object under the null.
Matrix moment_matrix(const InstrumentSeries& zs, const CovEstimatorSpec& spec, bool centered) {
    const Matrix& z = zs.z;
    const std::size_t n = z.rows();
    const std::size_t q = z.cols();
    if (n <= q) {
        throw std::invalid_argument("covariance: need n > q");
    }
    int lag = 0;
    if (spec.kind == CovKind::truncated_hac) {
        if (spec.lag < 0 || static_cast<std::size_t>(spec.lag) >= n) {
            throw std::invalid_argument("covariance: HAC lag must lie in [0, n)");
        }
        lag = spec.lag;
    }
    std::vector<double> mean(q, 0.0);
    if (centered) {
        for (std::size_t t = 0; t < n; ++t) {
            for (std::size_t i = 0; i < q; ++i) {
                mean[i] += z(t, i);
            }
        }
        for (auto& v : mean) {
            v /= static_cast<double>(n);
        }
    }

    Matrix sigma = autocovariance(z, mean, 0);
    for (int k = 1; k <= lag; ++k) {
        const Matrix gk = autocovariance(z, mean, static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < q; ++i) {
            for (std::size_t j = 0; j < q; ++j) {
                sigma(i, j) += gk(i, j) + gk(j, i);
            }
        }
    }

    Matrix chol = sigma;
    if (try_cholesky(chol)) {
        return sigma;
    }
    double trace = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
        trace += sigma(i, i);
    }
    const double ridge = 1e-8 * trace / static_cast<double>(q);
    Matrix repaired = sigma;
    for (std::size_t i = 0; i < q; ++i) {
        repaired(i, i) += ridge;
    }
    chol = repaired;
    if (try_cholesky(chol)) {
        return repaired;
    }
    throw std::runtime_error("covariance: estimate not positive definite after ridge (min eigenvalue " +
                             std::to_string(min_eigenvalue_sym(sigma)) + ")");
}

}  // namespace

Matrix covariance(const InstrumentSeries& zs, const CovEstimatorSpec& spec) {
    return moment_matrix(zs, spec, /*centered=*/true);
}

WaldOutcome wald_test(const InstrumentSeries& zs, const CovEstimatorSpec& spec) {
    const Matrix sigma = moment_matrix(zs, spec, /*centered=*/false);
    const std::size_t n = zs.z.rows();
    const std::size_t q = zs.z.cols();
    std::vector<double> zbar(q, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t i = 0; i < q; ++i) {
            zbar[i] += zs.z(t, i);
        }
    }
    for (auto& v : zbar) {
        v /= static_cast<double>(n);
    }
    Matrix chol = sigma;
    if (!try_cholesky(chol)) {
        throw std::runtime_error("wald_test: covariance not positive definite");
    }
    const std::vector<double> x = cholesky_solve(chol, zbar);
    double quad = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
        quad += zbar[i] * x[i];
    }
    WaldOutcome out;
    out.statistic = static_cast<double>(n) * quad;
    out.df = static_cast<int>(q);
    out.p_value = chi2_upper_tail(std::max(out.statistic, 0.0), out.df);
    return out;
}

StatewiseTResult statewise_t_test(const std::vector<double>& d, const StateSeries& states,
                                  const std::string& target_state, const TVarianceSpec& var_spec) {
    if (d.size() != states.size()) {
        throw std::invalid_argument("statewise_t_test: length mismatch");
    }
    StatewiseTResult res;
    std::vector<double> cond;
    cond.reserve(d.size());
    for (std::size_t t = 0; t < d.size(); ++t) {
        if (states.labels()[t] == target_state) {
            cond.push_back(d[t]);
        }
    }
    res.n_obs = cond.size();
    if (cond.size() < 2) {
        res.note = "insufficient data: n^l = " + std::to_string(cond.size());
        return res;
    }
    const auto nl = static_cast<double>(cond.size());
    double mean = 0.0;
    for (const double v : cond) {
        mean += v;
    }
    mean /= nl;

    double var_mean;
    if (var_spec.use_bootstrap) {
        BootstrapPlan plan = var_spec.plan;
        auto [len, clamped] = effective_block_len(cond.size(), plan.block_len);
        plan.block_len = len;
        if (clamped) {
            res.note = "block length clamped to " + std::to_string(len) + " for n^l = " +
                       std::to_string(cond.size());
        }
        const BootstrapIndexMatrix idx = gen_block_indices(cond.size(), plan);
        const auto B = static_cast<std::size_t>(plan.replications);
        double acc = 0.0;
        for (std::size_t b = 0; b < B; ++b) {
            double sum = 0.0;
            for (std::size_t t = 0; t < cond.size(); ++t) {
                sum += cond[idx(b, t)];
            }
            const double centered = sum / nl - mean;
            acc += centered * centered;
        }
        var_mean = acc / static_cast<double>(B);
    } else {
        double s2 = 0.0;
        for (const double v : cond) {
            s2 += (v - mean) * (v - mean);
        }
        s2 /= (nl - 1.0);
        var_mean = s2 / nl;
    }
    if (var_mean < 1e-300) {
        res.note = "insufficient data: zero variance in state '" + target_state + "'";
        return res;
    }
    res.ok = true;
    res.t = mean / std::sqrt(var_mean);
    res.p_two_sided = 2.0 * normal_cdf(-std::fabs(res.t));
    return res;
}

std::map<std::string, DfcSelection> dfc_select(const std::vector<double>& d,
                                               const StateSeries& states,
                                               const WaldOutcome& wald, double alpha) {
    std::map<std::string, DfcSelection> out;
    for (const auto& state : states.alphabet()) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t t = 0; t < d.size(); ++t) {
            if (states.labels()[t] == state) {
                sum += d[t];
                ++count;
            }
        }
        DfcSelection sel;
        if (count == 0) {
            sel.d_bar = std::numeric_limits<double>::quiet_NaN();
            sel.flagged = true;
        } else {
            sel.d_bar = sum / static_cast<double>(count);
            if (wald.p_value < alpha) {
                if (sel.d_bar < 0.0) {
                    sel.choice = DfcChoice::method1;
                } else if (sel.d_bar > 0.0) {
                    sel.choice = DfcChoice::method2;
                } else {
                    sel.flagged = true;  // exact tie, keep both
                }
            }
        }
        out.emplace(state, sel);
    }
    return out;
}

ClosedFormCov closed_form_sigma(const TwoStateDesign& design) {
    if (design.delta1 > 0.0) {
        throw std::invalid_argument("closed_form_sigma: delta1 must be <= 0");
    }
    if (design.v < 0.0 || design.v > 1.0) {
        throw std::invalid_argument("closed_form_sigma: v must lie in [0,1]");
    }
    if (!(design.state_prob > 0.0) || !(design.state_prob < 1.0)) {
        throw std::invalid_argument("closed_form_sigma: state probability must lie in (0,1)");
    }
    if (!(design.sigma2 > 0.0)) {
        throw std::invalid_argument("closed_form_sigma: sigma2 must be positive");
    }
    const double p = design.state_prob;
    const double d1 = design.delta1;
    const double d2 = design.delta2();
    const double s2 = design.sigma2;

    ClosedFormCov cov;
    cov.sigma11 = s2 + p * (1.0 - p) * (d1 - d2) * (d1 - d2);
    cov.sigma12 = p * s2 + p * (1.0 - p) * (d1 * d1 - d1 * d2);
    cov.sigma22 = p * s2 + p * (1.0 - p) * d1 * d1;
    cov.det = (1.0 - p) * p * s2 * ((1.0 - p) * d1 * d1 + p * d2 * d2 + s2);
    if (!(cov.det > 0.0)) {
        throw std::runtime_error("closed_form_sigma: determinant not positive");
    }
    cov.inv11 = cov.sigma22 / cov.det;
    cov.inv12 = -cov.sigma12 / cov.det;
    cov.inv22 = cov.sigma11 / cov.det;
    return cov;
}

double closed_form_wald(double d_bar1, double d_bar2, double n, const TwoStateDesign& design) {
    const double p = design.state_prob;
    const double d1 = design.delta1;
    const double d2 = design.delta2();
    const double s2 = design.sigma2;
    const double denom = (1.0 - p) * d1 * d1 + p * d2 * d2 + s2;

    // The three coefficient ratios of the n [D + E + F] expansion.
    const double coef_d = (s2 + p * d2 * d2) / (p * s2 * denom);
    const double coef_e = (d1 * d2) / (s2 * denom);
    const double coef_f = (s2 + (1.0 - p) * d1 * d1) / ((1.0 - p) * s2 * denom);

    const double term_d = p * p * d_bar1 * d_bar1 * coef_d;
    const double term_e = 2.0 * p * (1.0 - p) * d_bar1 * d_bar2 * coef_e;
    const double term_f = (1.0 - p) * (1.0 - p) * d_bar2 * d_bar2 * coef_f;
    return n * (term_d + term_e + term_f);
}

}  // namespace cmcs
