#include "stabsel/simgen.hpp"

#include "stabsel/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace stabsel {

std::string to_string(DesignKind kind) {
    switch (kind) {
        case DesignKind::independent: return "independent";
        case DesignKind::block: return "block";
        case DesignKind::toeplitz: return "toeplitz";
        case DesignKind::factor: return "factor";
        case DesignKind::two_correlated: return "two_correlated";
    }
    return "unknown";
}

DesignKind design_kind_from_string(const std::string& name) {
    for (auto kind : {DesignKind::independent, DesignKind::block, DesignKind::toeplitz, DesignKind::factor,
                      DesignKind::two_correlated})
        if (to_string(kind) == name) return kind;
    throw ConfigError("unknown design kind '" + name + "'");
}

void DesignSpec::validate() const {
    if (n < 2) throw ConfigError("design needs n >= 2");
    if (p < 1) throw ConfigError("design needs p >= 1");
    switch (kind) {
        case DesignKind::toeplitz:
            if (!(std::abs(rho) < 1.0)) throw ConfigError("toeplitz rho must lie in (-1, 1)");
            break;
        case DesignKind::two_correlated:
            if (p < 3) throw ConfigError("two_correlated design needs p >= 3");
            // covariance is PSD iff 2 rho^2 <= 1
            if (!(2.0 * rho * rho <= 1.0))
                throw ConfigError("two_correlated rho must satisfy |rho| <= 1/sqrt(2) for a valid covariance");
            break;
        case DesignKind::factor:
            if (factors < 1) throw ConfigError("factor design needs at least one factor");
            break;
        default:
            break;
    }
}

Matrix DesignSpec::population_covariance() const {
    validate();
    const auto P = static_cast<Eigen::Index>(p);
    Matrix sigma = Matrix::Identity(P, P);
    switch (kind) {
        case DesignKind::independent:
            break;
        case DesignKind::block:
            for (Eigen::Index k = 0; k < P; ++k)
                for (Eigen::Index m = 0; m < P; ++m)
                    if (k != m && k % static_cast<Eigen::Index>(kBlockCount) == m % static_cast<Eigen::Index>(kBlockCount))
                        sigma(k, m) = kBlockCorrelation;
            break;
        case DesignKind::toeplitz:
            for (Eigen::Index k = 0; k < P; ++k)
                for (Eigen::Index m = 0; m < P; ++m) sigma(k, m) = std::pow(rho, static_cast<double>(std::abs(k - m)));
            break;
        case DesignKind::two_correlated:
            sigma(0, 2) = sigma(2, 0) = rho;
            sigma(1, 2) = sigma(2, 1) = rho;
            break;
        case DesignKind::factor:
            throw ConfigError("factor design covariance depends on the drawn loadings");
    }
    return sigma;
}

namespace {

const std::map<std::string, DesignSpec>& presets() {
    static const std::map<std::string, DesignSpec> table = [] {
        std::map<std::string, DesignSpec> t;
        auto add = [&](const std::string& name, DesignKind kind, Index n, Index p, double rho = 0.0, Index factors = 2) {
            t[name] = DesignSpec{kind, n, p, rho, factors};
        };
        add("A", DesignKind::independent, 100, 1000);
        add("A-n1000", DesignKind::independent, 1000, 1000);
        add("B", DesignKind::block, 200, 1000);
        add("B-n1000", DesignKind::block, 1000, 1000);
        add("C", DesignKind::toeplitz, 200, 1000, 0.99);
        add("C-n1000", DesignKind::toeplitz, 1000, 1000, 0.99);
        add("D", DesignKind::factor, 200, 1000, 0.0, 2);
        add("D-n1000", DesignKind::factor, 1000, 1000, 0.0, 2);
        add("E", DesignKind::factor, 200, 1000, 0.0, 10);
        add("E-n1000", DesignKind::factor, 1000, 1000, 0.0, 10);
        add("A-desk", DesignKind::independent, 100, 200);
        add("B-desk", DesignKind::block, 100, 200);
        add("C-desk", DesignKind::toeplitz, 100, 200, 0.99);
        add("D-desk", DesignKind::factor, 100, 200, 0.0, 2);
        add("E-desk", DesignKind::factor, 100, 200, 0.0, 10);
        add("two-correlated", DesignKind::two_correlated, 200, 200, 0.7);
        return t;
    }();
    return table;
}

}  // namespace

DesignSpec design_preset(const std::string& name) {
    const auto& t = presets();
    auto it = t.find(name);
    if (it == t.end()) throw ConfigError("unknown design preset '" + name + "'");
    return it->second;
}

std::vector<std::string> design_preset_names() {
    std::vector<std::string> out;
    for (const auto& [name, spec] : presets()) out.push_back(name);
    return out;
}

Matrix gen_design_raw(const DesignSpec& spec, Rng& rng) {
    spec.validate();
    std::normal_distribution<double> z(0.0, 1.0);
    const auto n = static_cast<Eigen::Index>(spec.n);
    const auto p = static_cast<Eigen::Index>(spec.p);
    Matrix x(n, p);
    // column-major fill keeps draw order fixed regardless of Eigen internals
    auto fill = [&](Matrix& m) {
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = z(rng);
    };

    switch (spec.kind) {
        case DesignKind::independent:
            fill(x);
            break;
        case DesignKind::block: {
            const auto blocks = static_cast<Eigen::Index>(DesignSpec::kBlockCount);
            Matrix shared(n, blocks);
            fill(shared);
            fill(x);
            const double a = std::sqrt(DesignSpec::kBlockCorrelation);
            const double b = std::sqrt(1.0 - DesignSpec::kBlockCorrelation);
            for (Eigen::Index k = 0; k < p; ++k) x.col(k) = a * shared.col(k % blocks) + b * x.col(k);
            break;
        }
        case DesignKind::toeplitz: {
            fill(x);
            const double b = std::sqrt(1.0 - spec.rho * spec.rho);
            for (Eigen::Index k = 1; k < p; ++k) x.col(k) = spec.rho * x.col(k - 1) + b * x.col(k);
            break;
        }
        case DesignKind::factor: {
            const auto K = static_cast<Eigen::Index>(spec.factors);
            Matrix loadings(p, K);
            fill(loadings);
            Matrix latent(n, K);
            fill(latent);
            fill(x);
            x += latent * loadings.transpose();
            break;
        }
        case DesignKind::two_correlated: {
            fill(x);
            const double b = std::sqrt(std::max(0.0, 1.0 - 2.0 * spec.rho * spec.rho));
            x.col(2) = spec.rho * x.col(0) + spec.rho * x.col(1) + b * x.col(2);
            break;
        }
    }
    return x;
}

Dataset gen_design(const DesignSpec& spec, Rng& rng) { return normalize_columns(gen_design_raw(spec, rng)); }

Matrix population_design(const DesignSpec& spec) {
    const Matrix sigma = spec.population_covariance();
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw ConfigError("population covariance of this design is singular; no exact Gram factor");
    return llt.matrixU();
}

SimTruth gen_beta(Index p, Index s, BetaDist dist, Rng& rng) {
    if (s > p) throw ConfigError("sparsity s = " + std::to_string(s) + " exceeds p = " + std::to_string(p));
    SimTruth truth;
    truth.beta = Vector::Zero(static_cast<Eigen::Index>(p));
    std::vector<Index> all(p);
    std::iota(all.begin(), all.end(), Index{0});
    std::sample(all.begin(), all.end(), std::back_inserter(truth.support), s, rng);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index k : truth.support)
        truth.beta(static_cast<Eigen::Index>(k)) = dist == BetaDist::uniform01 ? uni(rng) : normal(rng);
    return truth;
}

Dataset gen_response(const Dataset& design, SimTruth& truth, double snr, Rng& rng) {
    if (truth.beta.size() != static_cast<Eigen::Index>(design.p())) throw ConfigError("beta has wrong length");
    if (!(snr > 0.0)) throw ConfigError("snr must be positive");
    const Vector signal = design.x() * truth.beta;
    const double energy = signal.squaredNorm();
    truth.snr = snr;
    if (std::isinf(snr)) {
        truth.sigma = 0.0;
        truth.realized_snr = std::numeric_limits<double>::infinity();
        return design.with_response(signal);
    }
    if (!(energy > 0.0)) throw DataError("signal X beta is zero, so a finite snr is undefined");
    truth.sigma = std::sqrt(energy / snr);
    const double sd = truth.sigma / std::sqrt(static_cast<double>(design.n()));
    std::normal_distribution<double> z(0.0, sd);
    Vector eps(signal.size());
    for (Eigen::Index i = 0; i < eps.size(); ++i) eps(i) = z(rng);
    truth.realized_snr = energy / eps.squaredNorm();
    return design.with_response(signal + eps);
}

Dataset gen_response_fixed_noise(const Dataset& design, const Vector& beta, double noise_sd, Rng& rng) {
    if (beta.size() != static_cast<Eigen::Index>(design.p())) throw ConfigError("beta has wrong length");
    if (!(noise_sd >= 0.0)) throw ConfigError("noise sd must be non-negative");
    Vector y = design.x() * beta;
    std::normal_distribution<double> z(0.0, 1.0);
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += noise_sd * z(rng);
    return design.with_response(std::move(y));
}

Matrix banded_precision(Index d, Index band, double value) {
    const auto D = static_cast<Eigen::Index>(d);
    Matrix theta = Matrix::Identity(D, D);
    for (Eigen::Index j = 0; j < D; ++j)
        for (Eigen::Index k = j + 1; k < D && k <= j + static_cast<Eigen::Index>(band); ++k) theta(j, k) = theta(k, j) = value;
    return theta;
}

Dataset gen_ggm(const Matrix& theta, Index n, Rng& rng) {
    if (theta.rows() != theta.cols() || theta.rows() < 1) throw ConfigError("precision matrix must be square");
    if ((theta - theta.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw ConfigError("precision matrix must be symmetric");
    Eigen::LLT<Matrix> llt(theta);
    if (llt.info() != Eigen::Success) throw ConfigError("precision matrix is not positive definite");
    // theta = L L'  =>  x = L'^{-1} z has covariance theta^{-1}
    const auto d = theta.rows();
    Matrix z(static_cast<Eigen::Index>(n), d);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < z.rows(); ++i) z(i, j) = normal(rng);
    const Matrix x = llt.matrixU().solve(z.transpose()).transpose();
    return Dataset(x);
}

Dataset permute_null(const Dataset& data, PermuteMode mode, const std::vector<Index>& keep, Rng& rng) {
    std::vector<bool> kept(data.p(), false);
    for (Index k : keep) {
        if (k >= data.p()) throw ConfigError("keep index " + std::to_string(k + 1) + " exceeds p = " + std::to_string(data.p()));
        kept[k] = true;
    }
    if (mode == PermuteMode::shared_except_k && keep.empty())
        throw ConfigError("shared_except_k permutation needs a non-empty keep set");

    Matrix x = data.x();
    std::vector<Index> perm(data.n());
    auto shuffle = [&] {
        std::iota(perm.begin(), perm.end(), Index{0});
        std::shuffle(perm.begin(), perm.end(), rng);
    };
    auto apply = [&](Eigen::Index k) {
        const Vector col = data.x().col(k);
        for (Index i = 0; i < data.n(); ++i) x(static_cast<Eigen::Index>(i), k) = col(static_cast<Eigen::Index>(perm[i]));
    };
    if (mode == PermuteMode::shared_except_k) shuffle();
    for (Index k = 0; k < data.p(); ++k) {
        if (kept[k]) continue;
        if (mode == PermuteMode::per_column) shuffle();
        apply(static_cast<Eigen::Index>(k));
    }
    std::optional<Vector> y;
    if (data.has_response()) y = data.y();
    return Dataset(std::move(x), std::move(y), data.names()).with_scale(data.scale());
}

}  // namespace stabsel
