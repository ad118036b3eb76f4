#ifndef ENTINAV_STUDY_HPP
#define ENTINAV_STUDY_HPP

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "entinav/edm.hpp"
#include "entinav/errors.hpp"

namespace entinav {

enum class GpField { neighbor_dist, radius, pref_speed, group_cohesion };
enum class GpLevel { min, max };

inline const char* to_string(GpField f) {
    switch (f) {
        case GpField::neighbor_dist: return "neighbor_dist";
        case GpField::radius: return "radius";
        case GpField::pref_speed: return "pref_speed";
        default: return "group_cohesion";
    }
}
inline const char* to_string(GpLevel l) { return l == GpLevel::min ? "min" : "max"; }

/// Canonical pair numbering of the 8-condition one-at-a-time design:
/// pair 1 = neighbor_dist/min, 2 = neighbor_dist/max, 3 = radius/min, ...
inline int pair_id_for(GpField f, GpLevel l) {
    return 2 * static_cast<int>(f) + (l == GpLevel::max ? 2 : 1);
}

/// One participant's ratings for one video pair. Ratings use the study's
/// [-2, 2] scale; synthetic data may carry fractional values.
struct StudyResponse {
    int participant_id = 0;
    int pair_id = 1;
    GpField varied_param = GpField::neighbor_dist;
    GpLevel level = GpLevel::min;
    std::array<double, 4> ratings{}; // friendliness, creepiness, comfort, unnerving

    void validate() const {
        if (pair_id < 1 || pair_id > 8)
            throw validation_error("pair_id must lie in 1..8");
        if (pair_id != pair_id_for(varied_param, level))
            throw validation_error("pair_id " + std::to_string(pair_id) +
                                   " inconsistent with varied_param/level");
        for (double r : ratings)
            if (!(r >= -2.0 && r <= 2.0))
                throw validation_error("ratings must lie in [-2, 2]");
    }
};

/// Per-pair mean entitativity features.
struct PairMean {
    int pair_id = 0;
    GpField varied_param = GpField::neighbor_dist;
    GpLevel level = GpLevel::min;
    EntitativityVector mean;
    int count = 0;
};

/// Component-wise rating means for each of the 8 pairs. Every pair must be
/// represented at least once.
inline std::vector<PairMean> aggregate_responses(const std::vector<StudyResponse>& responses) {
    std::array<Eigen::Vector4d, 8> sums;
    sums.fill(Eigen::Vector4d::Zero());
    std::array<int, 8> counts{};
    std::array<GpField, 8> fields{};
    std::array<GpLevel, 8> levels{};
    for (const StudyResponse& r : responses) {
        r.validate();
        const int i = r.pair_id - 1;
        sums[i] += Eigen::Vector4d(r.ratings[0], r.ratings[1], r.ratings[2], r.ratings[3]);
        counts[i] += 1;
        fields[i] = r.varied_param;
        levels[i] = r.level;
    }
    std::string missing;
    for (int i = 0; i < 8; ++i)
        if (counts[i] == 0) missing += (missing.empty() ? "" : ", ") + std::to_string(i + 1);
    if (!missing.empty()) throw data_error("no responses for pair(s): " + missing);
    std::vector<PairMean> out;
    out.reserve(8);
    for (int i = 0; i < 8; ++i)
        out.push_back({i + 1, fields[i], levels[i],
                       EntitativityVector::from_vec(sums[i] / counts[i]), counts[i]});
    return out;
}

/// The normalized one-at-a-time parameter setting behind a pair label:
/// the varied field at its bound, the rest at defaults (which normalize
/// to zero).
inline Eigen::Vector4d design_point(GpField f, GpLevel l,
                                    const GpNormalization& n = GpNormalization{}) {
    GroupParams gp = GroupParams::defaults();
    const GroupParams bound = (l == GpLevel::min) ? GroupParams::minima() : GroupParams::maxima();
    switch (f) {
        case GpField::neighbor_dist: gp.neighbor_dist = bound.neighbor_dist; break;
        case GpField::radius: gp.radius = bound.radius; break;
        case GpField::pref_speed: gp.pref_speed = bound.pref_speed; break;
        case GpField::group_cohesion: gp.group_cohesion = bound.group_cohesion; break;
    }
    return normalize_gp(gp, n);
}

/// Least-squares fit of the perception matrix, with its invertibility
/// status. A non-invertible fit is still reported; it just cannot be turned
/// into an EntitativityMapping.
struct MappingFit {
    Eigen::Matrix4d matrix = Eigen::Matrix4d::Zero();
    double determinant = 0.0;
    bool invertible = false;

    EntitativityMapping to_mapping(const GpNormalization& n = GpNormalization{}) const {
        return EntitativityMapping::from_matrix(matrix, n);
    }
};

/// Ordinary least squares per feature, no intercept (the normalization is
/// centered at the defaults): minimizes sum_i ||E_i - M n_i||^2 over the 8
/// design points.
inline MappingFit fit_mapping(const std::vector<PairMean>& points,
                              const GpNormalization& n = GpNormalization{}) {
    const int rows = static_cast<int>(points.size());
    if (rows < 4) throw data_error("need at least 4 design points to fit");
    Eigen::MatrixXd X(rows, 4);
    Eigen::MatrixXd Y(rows, 4);
    for (int i = 0; i < rows; ++i) {
        X.row(i) = design_point(points[i].varied_param, points[i].level, n).transpose();
        Y.row(i) = points[i].mean.to_vec().transpose();
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < 4) throw data_error("rank-deficient design: a parameter never varies");
    MappingFit fit;
    fit.matrix = qr.solve(Y).transpose();
    fit.determinant = fit.matrix.determinant();
    fit.invertible = std::abs(fit.determinant) > 1e-9;
    return fit;
}

/// Pearson correlations, Cronbach's alpha, and PCA explained-variance
/// fractions of the four rating items.
struct StudyStatistics {
    Eigen::Matrix4d correlation = Eigen::Matrix4d::Identity();
    double cronbach_alpha = 0.0;
    std::array<double, 4> explained_variance{}; // descending fractions
};

inline StudyStatistics study_statistics(const std::vector<StudyResponse>& responses) {
    static const char* kItems[4] = {"friendliness", "creepiness", "comfort", "unnerving"};
    const int n = static_cast<int>(responses.size());
    if (n < 2) throw data_error("need at least 2 responses for statistics");
    Eigen::MatrixXd items(n, 4);
    for (int i = 0; i < n; ++i) {
        responses[i].validate();
        for (int j = 0; j < 4; ++j) items(i, j) = responses[i].ratings[j];
    }
    const Eigen::RowVector4d mean = items.colwise().mean();
    const Eigen::MatrixXd centered = items.rowwise() - mean;
    const Eigen::RowVector4d var = centered.array().square().colwise().sum() / (n - 1);
    for (int j = 0; j < 4; ++j)
        if (!(var[j] > 0.0))
            throw data_error(std::string("zero variance in item ") + kItems[j]);

    StudyStatistics st;
    const Eigen::Matrix4d cov = (centered.transpose() * centered) / (n - 1);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            st.correlation(a, b) = cov(a, b) / std::sqrt(var[a] * var[b]);

    // Cronbach's alpha needs consistent item polarity; creepiness and
    // unnerving are reverse-scored when they run against friendliness.
    Eigen::MatrixXd oriented = centered;
    for (int j : {1, 3})
        if (st.correlation(j, 0) < 0.0) oriented.col(j) *= -1.0;
    const double item_var_sum =
        (oriented.array().square().colwise().sum() / (n - 1)).sum();
    const Eigen::VectorXd total = oriented.rowwise().sum();
    const double total_var = total.squaredNorm() / (n - 1); // total is centered
    if (!(total_var > 0.0)) throw data_error("degenerate total score: zero variance");
    st.cronbach_alpha = (4.0 / 3.0) * (1.0 - item_var_sum / total_var);

    // PCA on the correlation matrix; eigenvalues sum to 4.
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(st.correlation);
    for (int j = 0; j < 4; ++j)
        st.explained_variance[j] = std::max(0.0, eig.eigenvalues()[3 - j]) / 4.0;
    return st;
}

} // namespace entinav

#endif
