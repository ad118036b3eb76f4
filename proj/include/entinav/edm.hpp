#ifndef ENTINAV_EDM_HPP
#define ENTINAV_EDM_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <utility>

#include "entinav/core.hpp"
#include "entinav/errors.hpp"

namespace entinav {

/// The four perceived-emotion features, in fixed component order.
struct EntitativityVector {
    double friendliness = 0.0;
    double creepiness = 0.0;
    double comfort = 0.0;
    double unnerving = 0.0;

    Eigen::Vector4d to_vec() const { return {friendliness, creepiness, comfort, unnerving}; }
    static EntitativityVector from_vec(const Eigen::Vector4d& v) {
        return {v[0], v[1], v[2], v[3]};
    }
};

inline double distance(const EntitativityVector& a, const EntitativityVector& b) {
    return (a.to_vec() - b.to_vec()).norm();
}

enum class InvisibilityMode { fixed_s, lower_bound };

/// Scenario-level invisibility control: either a fixed level s, or a lower
/// bound s_min that intervention may trade against.
struct InvisibilitySetting {
    InvisibilityMode mode = InvisibilityMode::fixed_s;
    double s = 1.0;
    double s_min = 1.0;

    void validate() const {
        if (!(s >= 0.0 && s <= 1.0)) throw validation_error("invisibility s must lie in [0, 1]");
        if (!(s_min >= 0.0 && s_min <= 1.0))
            throw validation_error("invisibility s_min must lie in [0, 1]");
    }
};

/// Normalization offsets/divisors of the linear perception map. The divisors
/// are twice each parameter's bound range.
struct GpNormalization {
    Eigen::Vector4d offset{5.0, 0.7, 1.5, 0.5};
    Eigen::Vector4d divisor{14.0, 3.4, 2.0, 1.8};
};

inline Eigen::Vector4d gp_to_vec(const GroupParams& gp) {
    return {gp.neighbor_dist, gp.radius, gp.pref_speed, gp.group_cohesion};
}
inline GroupParams gp_from_vec(const Eigen::Vector4d& v) { return {v[0], v[1], v[2], v[3]}; }

/// Maps bounded group parameters to the centered, rescaled vector the
/// perception matrix acts on. Out-of-bounds input throws
/// bound_violation_error naming the field.
inline Eigen::Vector4d normalize_gp(const GroupParams& gp,
                                    const GpNormalization& n = GpNormalization{}) {
    gp.validate();
    return (gp_to_vec(gp) - n.offset).cwiseQuotient(n.divisor);
}

/// Exact inverse of normalize_gp (no bound check).
inline GroupParams denormalize_gp(const Eigen::Vector4d& v,
                                  const GpNormalization& n = GpNormalization{}) {
    return gp_from_vec(v.cwiseProduct(n.divisor) + n.offset);
}

/// The data-driven perception mapping: a 4x4 matrix from normalized group
/// parameters to entitativity features, with the derived extreme feature
/// vectors at the all-min / all-max parameter corners.
struct EntitativityMapping {
    Eigen::Matrix4d matrix = Eigen::Matrix4d::Zero();
    Eigen::Matrix4d inverse = Eigen::Matrix4d::Zero();
    GpNormalization normalization;
    double determinant = 0.0;
    EntitativityVector e_min;
    EntitativityVector e_max;
    /// True when the threat direction (creepiness + unnerving - friendliness
    /// - comfort) has positive coefficients on every normalized parameter,
    /// which makes the parameter corners the extreme realizable features.
    bool corner_extremes = false;

    static EntitativityMapping from_matrix(const Eigen::Matrix4d& m,
                                           const GpNormalization& n = GpNormalization{}) {
        EntitativityMapping em;
        em.matrix = m;
        em.normalization = n;
        em.determinant = m.determinant();
        if (std::abs(em.determinant) <= 1e-9)
            throw config_error("mapping matrix is singular (|det| <= 1e-9)");
        em.inverse = m.inverse();
        const Eigen::Vector4d n_min =
            (gp_to_vec(GroupParams::minima()) - n.offset).cwiseQuotient(n.divisor);
        const Eigen::Vector4d n_max =
            (gp_to_vec(GroupParams::maxima()) - n.offset).cwiseQuotient(n.divisor);
        em.e_min = EntitativityVector::from_vec(m * n_min);
        em.e_max = EntitativityVector::from_vec(m * n_max);
        const Eigen::RowVector4d threat = m.row(1) + m.row(3) - m.row(0) - m.row(2);
        em.corner_extremes = (threat.array() > 0.0).all();
        return em;
    }

    /// The mapping fitted from the perception study; the library default.
    static const EntitativityMapping& study() {
        static const EntitativityMapping em = from_matrix([] {
            Eigen::Matrix4d m;
            m << -1.7862, -1.0614, -2.1983, -1.7122,
                  1.1224,  1.1441,  1.7672, -0.2634,
                 -1.0500, -1.2176, -2.1466, -0.9220,
                  1.1948,  1.7000,  0.9224,  0.3622;
            return m;
        }());
        return em;
    }
};

/// Perceived entitativity of a parameter setting: matrix times the
/// normalized parameter vector.
inline EntitativityVector entitativity(const EntitativityMapping& mapping, const GroupParams& gp) {
    return EntitativityVector::from_vec(mapping.matrix * normalize_gp(gp, mapping.normalization));
}

/// (e_min, e_max): the mapping evaluated at the all-min and all-max
/// parameter corners.
inline std::pair<EntitativityVector, EntitativityVector>
extreme_entitativity(const EntitativityMapping& mapping) {
    return {mapping.e_min, mapping.e_max};
}

inline double extreme_span(const EntitativityMapping& mapping) {
    const double d = distance(mapping.e_max, mapping.e_min);
    if (!(d > 1e-12))
        throw config_error("degenerate mapping: e_max equals e_min");
    return d;
}

/// Social invisibility of a feature vector: 1 at e_min, 0 at e_max,
/// clamped to [0, 1] off the segment.
inline double invisibility(const EntitativityMapping& mapping, const EntitativityVector& e) {
    const double s = 1.0 - distance(e, mapping.e_min) / extreme_span(mapping);
    return std::clamp(s, 0.0, 1.0);
}

/// The feature vector on the e_min..e_max segment whose invisibility is
/// exactly s.
inline EntitativityVector target_entitativity(const EntitativityMapping& mapping, double s) {
    if (!(s >= 0.0 && s <= 1.0)) throw input_error("s must lie in [0, 1]");
    extreme_span(mapping);
    const Eigen::Vector4d lo = mapping.e_min.to_vec();
    const Eigen::Vector4d hi = mapping.e_max.to_vec();
    return EntitativityVector::from_vec(lo + (1.0 - s) * (hi - lo));
}

/// Group parameters realizing a desired feature vector: inverse map, then
/// denormalize, then clamp into bounds. Clamping is a no-op on the
/// e_min..e_max segment.
inline GroupParams params_for_entitativity(const EntitativityMapping& mapping,
                                           const EntitativityVector& e_des) {
    const Eigen::Vector4d n = mapping.inverse * e_des.to_vec();
    return denormalize_gp(n, mapping.normalization).clamped();
}

/// Enforces a lower bound on invisibility: returns e unchanged when already
/// compliant, otherwise the point on the segment from e toward e_min where
/// invisibility equals s_min exactly.
inline EntitativityVector constrain_invisibility(const EntitativityMapping& mapping,
                                                 const EntitativityVector& e, double s_min) {
    if (!(s_min >= 0.0 && s_min <= 1.0)) throw input_error("s_min must lie in [0, 1]");
    const double span = extreme_span(mapping);
    const double d = distance(e, mapping.e_min);
    if (1.0 - d / span >= s_min) return e;
    // Along e -> e_min, distance to e_min shrinks by (1 - t); solve for the
    // point where (1 - t) * d / span == 1 - s_min.
    const double t = 1.0 - (1.0 - s_min) * span / d;
    const Eigen::Vector4d ev = e.to_vec();
    return EntitativityVector::from_vec(ev + t * (mapping.e_min.to_vec() - ev));
}

} // namespace entinav

#endif
