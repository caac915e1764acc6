#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "support/stats.hpp"
#include "wavattack/analysis.hpp"
#include "wavattack/errors.hpp"
#include "wavattack/session.hpp"

using namespace wavattack;

namespace {

AttackConfig fixed_t2(double t2) {
    AttackConfig a;
    a.policy = T2Policy::fixed;
    a.t2 = t2;
    return a;
}

std::string csv(const SessionDataset& ds) {
    std::ostringstream os;
    write_dataset_csv(ds, os);
    return os.str();
}

// Mean of the per-round exact conditional variance; the variance of the
// zero-mean mixture x_B|E.
double predicted_v_be(const SessionDataset& ds) {
    long double sum = 0.0L;
    for (const RoundRecord& r : ds.records) {
        const AttackSolution& s = r.solution;
        sum += v_be_general(s.t2, s.signal_intensity, s.lo_intensity, ds.params.lo_intensity, s.t1);
    }
    return static_cast<double>(sum / ds.records.size());
}

std::vector<double> bob_given_eve_x(const SessionDataset& ds) {
    const double k = std::sqrt(ds.params.eta / 2.0);
    std::vector<double> out;
    out.reserve(ds.records.size());
    for (const RoundRecord& r : ds.records) out.push_back(r.bob.x - k * r.eve.x);
    return out;
}

}  // namespace

TEST_CASE("Eve's heterodyne adds two units of vacuum") {
    for (double v_a : {0.0, 10.0}) {
        RandomSource rng(31);
        std::vector<double> xa(400000), xe(400000);
        for (std::size_t i = 0; i < xa.size(); ++i) {
            const QuadraturePair a = sample_gaussian_pair(rng, v_a);
            xa[i] = a.x;
            xe[i] = eve_heterodyne(a, rng).x;
        }
        const auto m = teststats::moments(xe);
        CHECK_MESSAGE(teststats::within_sigma(m.variance, v_a + 2.0, m.variance_se()), "V_A = ", v_a);
        if (v_a > 0.0) {
            const auto c = teststats::covariance(xa, xe);
            CHECK(teststats::within_sigma(c.cov, v_a, c.se));
        }
    }
}

TEST_CASE("noiseless Bob sees exactly sqrt(eta/2) of Eve's outcome") {
    const ProtocolParams p;
    RandomSource rng(3);
    for (QuadraturePair eve : {QuadraturePair{3.0, 1.0}, QuadraturePair{2.0, -1.0}, QuadraturePair{-4.0, 0.5}}) {
        const AttackSolution s = solve_round(eve, p, fixed_t2(0.5), 0.5);
        const QuadraturePair b = bob_measure(s, eve, p, rng, false);
        CHECK(b.x == std::sqrt(0.3) * eve.x);
        CHECK(b.p == std::sqrt(0.3) * eve.p);
        const QuadraturePair d = bob_deterministic(s, p.lo_intensity);
        CHECK(std::abs(d.x - b.x) < 1e-8);
        CHECK(std::abs(d.p - b.p) < 1e-8);
    }
}

TEST_CASE("a solution that misses the equations is a contract violation") {
    const ProtocolParams p;
    RandomSource rng(3);
    AttackSolution s = solve_round({3.0, 1.0}, p, fixed_t2(0.5), 0.5);
    s.t1 += 0.01;
    CHECK_THROWS_AS(bob_measure(s, {3.0, 1.0}, p, rng), ContractViolation);
}

TEST_CASE("Bob's conditional noise with a vanishing fake signal") {
    const auto run = [](double t2, std::uint64_t seed) {
        AttackSolution s;
        s.t1 = 0.5;
        s.t2 = t2;
        s.signal_intensity = 0.0;
        s.lo_intensity = 1e8;
        RandomSource rng(seed);
        std::vector<double> x(1'000'000), p(1'000'000);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const QuadraturePair q = bob_noise(s, 1e8, rng);
            x[i] = q.x;
            p[i] = q.p;
        }
        return std::pair{teststats::moments(x), teststats::moments(p)};
    };
    SUBCASE("T2 = 1/2") {
        const auto [mx, mp] = run(0.5, 1);
        CHECK(teststats::within_sigma(mx.variance, 1.0, mx.variance_se()));
        CHECK(teststats::within_sigma(mp.variance, 1.0, mp.variance_se()));
    }
    SUBCASE("T2 = 0.3") {
        const auto [mx, mp] = run(0.3, 2);
        CHECK(teststats::within_sigma(mx.variance, 1.2432, mx.variance_se()));
        // The transmitted port carries T2 rather than 1 - T2 in its
        // shot-noise weight.
        CHECK(teststats::within_sigma(mp.variance, 2 * 0.3 * 0.7 * 0.16 + 8 * 0.09 * 0.7, mp.variance_se()));
    }
}

TEST_CASE("Bob's conditional noise with a bright fake signal") {
    AttackSolution s;
    s.t1 = 0.3;
    s.t2 = 0.3;
    s.signal_intensity = 0.5e8;
    s.lo_intensity = 1e8;
    RandomSource rng(77);
    std::vector<double> x(1'000'000);
    for (auto& v : x) v = bob_noise(s, 1e8, rng).x;
    const auto m = teststats::moments(x);
    CHECK(teststats::within_sigma(m.variance, v_be_general(0.3, 0.5e8, 1e8, 1e8, 0.3), m.variance_se()));
}

TEST_CASE("sessions are reproducible from the seed") {
    const ProtocolParams p;
    const SessionDataset a = run_session(p, fixed_t2(0.5), 3000, 42);
    const SessionDataset b = run_session(p, fixed_t2(0.5), 3000, 42);
    const SessionDataset c = run_session(p, fixed_t2(0.5), 3000, 43);
    CHECK(csv(a) == csv(b));
    CHECK(csv(a) != csv(c));
}

TEST_CASE("rounds depend only on their block, not on the session length") {
    const ProtocolParams p;
    const SessionDataset longer = run_session(p, fixed_t2(0.5), 3000, 9);
    const SessionDataset shorter = run_session(p, fixed_t2(0.5), 2 * kRoundsPerStream, 9);
    for (std::size_t k = 0; k < shorter.records.size(); ++k) {
        REQUIRE(longer.records[k].bob == shorter.records[k].bob);
        REQUIRE(longer.records[k].solution == shorter.records[k].solution);
    }
}

TEST_CASE("session statistics at T2 = 1/2") {
    const ProtocolParams p;
    const SessionDataset ds = run_session(p, fixed_t2(0.5), 200000, 5);
    std::vector<double> xa, xb, pb;
    for (const auto& r : ds.records) {
        xa.push_back(r.alice.x);
        xb.push_back(r.bob.x);
        pb.push_back(r.bob.p);
    }
    const auto cov = teststats::covariance(xa, xb);
    CHECK(teststats::within_sigma(cov.cov, std::sqrt(p.eta / 2) * p.v_a, cov.se));

    const auto noise = teststats::moments(bob_given_eve_x(ds));
    CHECK(teststats::within_sigma(noise.variance, predicted_v_be(ds), noise.variance_se()));
    // Outcomes with x_E > p_E balance with a weak fake signal near 1/2.
    // Nearly all the rest cannot, whatever t2, and carry a fake signal as
    // bright as the fake LO.
    std::size_t bright = 0, upper_half = 0;
    for (const auto& r : ds.records) {
        const double fraction = r.solution.signal_intensity / r.solution.lo_intensity;
        REQUIRE(fraction <= 2.0 * (1 + 1e-12));
        if (r.eve.x > r.eve.p) {
            REQUIRE(fraction <= 0.01);
        } else {
            ++upper_half;
            bright += fraction > 1.0;
        }
    }
    CHECK(bright > 0.99 * upper_half);

    // x and p are symmetric at T2 = 1/2.
    const auto mx = teststats::moments(xb);
    const auto mp = teststats::moments(pb);
    CHECK(std::abs(mx.variance - mp.variance) < 3 * std::hypot(mx.variance_se(), mp.variance_se()));

    // No memory between rounds.
    std::vector<double> lead(noise.n - 1), lag(noise.n - 1);
    const auto resid = bob_given_eve_x(ds);
    for (std::size_t i = 0; i + 1 < resid.size(); ++i) {
        lead[i] = resid[i];
        lag[i] = resid[i + 1];
    }
    const double rho = teststats::covariance(lead, lag).cov / noise.variance;
    CHECK(std::abs(rho) < 3.0 / std::sqrt(static_cast<double>(lead.size())));
}

TEST_CASE("session noise matches the exact per-round prediction away from 1/2") {
    const ProtocolParams p;
    const SessionDataset ds = run_session(p, fixed_t2(0.3), 200000, 6);
    const auto noise = teststats::moments(bob_given_eve_x(ds));
    CHECK(teststats::within_sigma(noise.variance, predicted_v_be(ds), noise.variance_se()));
}

TEST_CASE("hiding policy runs at the root nearest 1/2") {
    ProtocolParams p;
    p.eta = 0.5;
    AttackConfig a;
    a.policy = T2Policy::hiding;
    CHECK(session_t2(p, a) == doctest::Approx(0.73449497177021541).epsilon(1e-12));
}

TEST_CASE("same-sign-only sessions stop at the first mixed-sign round") {
    const ProtocolParams p;
    AttackConfig a;
    a.policy = T2Policy::same_sign_only;
    try {
        (void)run_session(p, a, 1000, 1);
        FAIL("expected RoundInfeasibleError");
    } catch (const RoundInfeasibleError& e) {
        CHECK(e.round() < 1000);
        CHECK(std::string(e.what()).find("round") != std::string::npos);
    }
}

TEST_CASE("near-zero outcomes take the canonical solution") {
    const AttackSolution s = solve_round({1e-13, -1e-13}, ProtocolParams{}, fixed_t2(0.5), 0.5);
    CHECK(s.t1 == 0.5);
    CHECK(s.t2 == 0.5);
    CHECK(s.signal_intensity == 0.0);
}

TEST_CASE("outcomes needing a wide T2 excursion still solve") {
    const ProtocolParams p;
    // p_E - x_E = 40 needs |T2 - 1/2| well beyond the local window.
    const AttackSolution s = solve_round({-20.0, 20.0}, p, fixed_t2(0.5), 0.5);
    CHECK(std::abs(s.t2 - 0.5) > 0.02);
    CHECK(relative_residual(s, {-20.0, 20.0}, p.eta, p.lo_amplitude()) < kResidualTolerance);
}

TEST_CASE("dataset CSV round-trips exactly") {
    const SessionDataset ds = run_session(ProtocolParams{}, fixed_t2(0.3), 500, 8);
    std::istringstream in(csv(ds));
    const std::vector<RoundRecord> back = read_dataset_csv(in);
    REQUIRE(back.size() == ds.records.size());
    for (std::size_t k = 0; k < back.size(); ++k) {
        CHECK(back[k].alice == ds.records[k].alice);
        CHECK(back[k].eve == ds.records[k].eve);
        CHECK(back[k].bob == ds.records[k].bob);
        CHECK(back[k].solution.t1 == ds.records[k].solution.t1);
        CHECK(back[k].solution.t2 == ds.records[k].solution.t2);
        CHECK(back[k].solution.signal_intensity == ds.records[k].solution.signal_intensity);
    }
    std::istringstream bad("round,x_A\n1,2\n");
    CHECK_THROWS(read_dataset_csv(bad));
}

TEST_CASE("JSON lines output has one object per round") {
    const SessionDataset ds = run_session(ProtocolParams{}, fixed_t2(0.5), 10, 8);
    std::ostringstream os;
    write_dataset_jsonl(ds, os);
    std::istringstream in(os.str());
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        CHECK(line.front() == '{');
        CHECK(line.find("\"signal_intensity\"") != std::string::npos);
        ++n;
    }
    CHECK(n == 10);
}

TEST_CASE("estimates do not depend on the shot-noise unit") {
    ProtocolParams p1, p2;
    p2.n0.n0 = 2.0;
    const auto e1 = estimate_parameters(run_session(p1, fixed_t2(0.5), 50000, 12));
    const auto e2 = estimate_parameters(run_session(p2, fixed_t2(0.5), 50000, 12));
    CHECK(std::abs(e1.excess_hat - e2.excess_hat) < 3 * std::hypot(e1.excess_se, e2.excess_se));
    CHECK(std::abs(e1.t_hat - e2.t_hat) < 3 * std::hypot(e1.t_se, e2.t_se));
}
