#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "entinav/study.hpp"

using namespace entinav;

namespace {

StudyResponse make_response(int participant, GpField f, GpLevel l,
                            const std::array<double, 4>& ratings) {
    StudyResponse r;
    r.participant_id = participant;
    r.varied_param = f;
    r.level = l;
    r.pair_id = pair_id_for(f, l);
    r.ratings = ratings;
    return r;
}

std::vector<StudyResponse> all_pairs_constant(double v) {
    std::vector<StudyResponse> out;
    for (int f = 0; f < 4; ++f)
        for (GpLevel l : {GpLevel::min, GpLevel::max})
            out.push_back(make_response(1, static_cast<GpField>(f), l, {v, v, v, v}));
    return out;
}

/// Responses whose per-pair means equal the model predictions exactly.
std::vector<StudyResponse> responses_from_matrix(const Eigen::Matrix4d& m, int participants = 2,
                                                 double noise_sigma = 0.0,
                                                 std::uint64_t seed = 99) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, noise_sigma);
    std::vector<StudyResponse> out;
    for (int f = 0; f < 4; ++f) {
        for (GpLevel l : {GpLevel::min, GpLevel::max}) {
            const Eigen::Vector4d n = design_point(static_cast<GpField>(f), l);
            const Eigen::Vector4d e = m * n;
            for (int p = 1; p <= participants; ++p) {
                std::array<double, 4> ratings;
                for (int k = 0; k < 4; ++k) {
                    double v = e[k];
                    if (noise_sigma > 0.0) v += gauss(rng);
                    ratings[k] = std::clamp(v, -2.0, 2.0);
                }
                out.push_back(make_response(p, static_cast<GpField>(f), l, ratings));
            }
        }
    }
    return out;
}

Eigen::Matrix4d study_matrix() { return EntitativityMapping::study().matrix; }

/// Independent least-squares oracle: the one-at-a-time design decouples per
/// column, so each entry is a 2-point projection.
Eigen::Matrix4d oracle_fit(const std::vector<PairMean>& points) {
    Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
    for (int col = 0; col < 4; ++col) {
        double xtx = 0.0;
        Eigen::Vector4d xty = Eigen::Vector4d::Zero();
        for (const PairMean& p : points) {
            const Eigen::Vector4d n = design_point(p.varied_param, p.level);
            xtx += n[col] * n[col];
            xty += n[col] * p.mean.to_vec();
        }
        for (int row = 0; row < 4; ++row) m(row, col) = xty[row] / xtx;
    }
    return m;
}

} // namespace

TEST_CASE("pair numbering covers the 8 conditions") {
    std::set<int> seen;
    for (int f = 0; f < 4; ++f)
        for (GpLevel l : {GpLevel::min, GpLevel::max})
            seen.insert(pair_id_for(static_cast<GpField>(f), l));
    CHECK(seen == std::set<int>{1, 2, 3, 4, 5, 6, 7, 8});

    StudyResponse r = make_response(1, GpField::radius, GpLevel::max, {0, 0, 0, 0});
    r.pair_id = 3; // wrong: radius/max is 4
    CHECK_THROWS_AS(r.validate(), validation_error);
}

TEST_CASE("aggregate: zero ratings give zero vectors") {
    const auto means = aggregate_responses(all_pairs_constant(0.0));
    REQUIRE(means.size() == 8);
    for (const PairMean& p : means) {
        CHECK(p.mean.friendliness == 0.0);
        CHECK(p.mean.unnerving == 0.0);
        CHECK(p.count == 1);
    }
}

TEST_CASE("aggregate: means are arithmetic") {
    auto responses = all_pairs_constant(0.0);
    responses.push_back(
        make_response(2, GpField::neighbor_dist, GpLevel::min, {2.0, -2.0, 2.0, -2.0}));
    const auto means = aggregate_responses(responses);
    const PairMean& p1 = means.front();
    REQUIRE(p1.pair_id == 1);
    CHECK(p1.mean.friendliness == Catch::Approx(1.0));
    CHECK(p1.mean.creepiness == Catch::Approx(-1.0));
    CHECK(p1.mean.comfort == Catch::Approx(1.0));
    CHECK(p1.mean.unnerving == Catch::Approx(-1.0));
    CHECK(p1.count == 2);
}

TEST_CASE("aggregate: missing pairs are reported") {
    std::vector<StudyResponse> responses{
        make_response(1, GpField::neighbor_dist, GpLevel::min, {0, 0, 0, 0})};
    CHECK_THROWS_AS(aggregate_responses(responses), data_error);
}

TEST_CASE("aggregate of model-generated responses reproduces the predictions") {
    const auto means = aggregate_responses(responses_from_matrix(study_matrix()));
    for (const PairMean& p : means) {
        const Eigen::Vector4d expect = study_matrix() * design_point(p.varied_param, p.level);
        CHECK((p.mean.to_vec() - expect).norm() < 1e-12);
    }
}

TEST_CASE("fit recovers the generator exactly on noiseless data") {
    const auto means = aggregate_responses(responses_from_matrix(study_matrix()));
    const MappingFit fit = fit_mapping(means);
    CHECK(fit.invertible);
    CHECK((fit.matrix - study_matrix()).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((fit.matrix - oracle_fit(means)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("fit on all-zero points yields the zero matrix flagged non-invertible") {
    const auto means = aggregate_responses(all_pairs_constant(0.0));
    const MappingFit fit = fit_mapping(means);
    CHECK(fit.matrix.isZero(1e-14));
    CHECK_FALSE(fit.invertible);
    CHECK_THROWS_AS(fit.to_mapping(), config_error);
}

TEST_CASE("fit under small noise stays near the generator") {
    const auto responses = responses_from_matrix(study_matrix(), 40, 0.01, 7);
    const MappingFit fit = fit_mapping(aggregate_responses(responses));
    CHECK((fit.matrix - study_matrix()).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("fit is exact for arbitrary full-rank generators") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::Matrix4d g;
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) g(r, c) = u(rng);
        const auto means = aggregate_responses(responses_from_matrix(g, 1, 0.0, trial));
        const MappingFit fit = fit_mapping(means);
        CHECK((fit.matrix - g).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("statistics: identical items give unit correlations and alpha 1") {
    std::vector<StudyResponse> responses;
    const double vals[6] = {-2, -1, 0, 1, 2, 1};
    for (int i = 0; i < 6; ++i) {
        const double v = vals[i];
        responses.push_back(make_response(i, GpField::neighbor_dist, GpLevel::min, {v, v, v, v}));
    }
    const StudyStatistics st = study_statistics(responses);
    CHECK(st.correlation.isApprox(Eigen::Matrix4d::Ones(), 1e-12));
    CHECK(st.cronbach_alpha == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("statistics: paper-polarity items give alpha 1 after reverse scoring") {
    std::vector<StudyResponse> responses;
    const double vals[6] = {-2, -1, 0, 1, 2, 1};
    for (int i = 0; i < 6; ++i) {
        const double v = vals[i];
        responses.push_back(
            make_response(i, GpField::neighbor_dist, GpLevel::min, {v, -v, v, -v}));
    }
    const StudyStatistics st = study_statistics(responses);
    CHECK(st.correlation(0, 1) == Catch::Approx(-1.0).margin(1e-12));
    CHECK(st.correlation(0, 2) == Catch::Approx(1.0).margin(1e-12));
    CHECK(st.correlation(2, 3) == Catch::Approx(-1.0).margin(1e-12));
    CHECK(st.cronbach_alpha == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("statistics: zero-variance items are rejected by name") {
    std::vector<StudyResponse> responses;
    for (int i = 0; i < 4; ++i)
        responses.push_back(make_response(i, GpField::neighbor_dist, GpLevel::min,
                                          {1.0, static_cast<double>(i % 2), 0.0, 1.0}));
    try {
        study_statistics(responses);
        FAIL("expected data_error");
    } catch (const data_error& e) {
        CHECK(std::string(e.what()).find("friendliness") != std::string::npos);
    }
}

TEST_CASE("statistics: rank-2 responses concentrate variance in two components") {
    std::vector<StudyResponse> responses;
    int participant = 0;
    for (int i = 0; i < 25; ++i) {
        const double a = (i % 5) - 2;
        const double b = (i / 5) - 2;
        const GpField f = static_cast<GpField>(i % 4);
        const GpLevel l = (i % 8) < 4 ? GpLevel::min : GpLevel::max;
        responses.push_back(make_response(participant++, f, l, {a, -a, b, -b}));
    }
    const StudyStatistics st = study_statistics(responses);
    CHECK(st.explained_variance[0] + st.explained_variance[1] >= 0.96);
    CHECK(st.explained_variance[0] >= st.explained_variance[1]);
    CHECK(st.explained_variance[1] >= st.explained_variance[2]);
}
