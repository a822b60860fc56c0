#include "dmce/channel_model.hpp"
#include "dmce/measurement.hpp"
#include "dmce/quantizer.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace dmce;

namespace {

CMat random_complex(int r, int c, Rng& rng)
{
    std::normal_distribution<double> g;
    CMat m(r, c);
    for (Index i = 0; i < m.size(); ++i) {
        m.data()[i] = Complex(g(rng), g(rng));
    }
    return m;
}

double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }
double cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// E[(z - Q(z))^2] for z ~ N(0, 1) and the 2^b-level mid-rise quantizer of step d,
// summed cell by cell in closed form.
double quantizer_mse(int bits, double d)
{
    const int levels = 1 << bits;
    const int half = levels / 2;
    double total = 0.0;
    for (int k = 1; k <= levels; ++k) {
        const double r = (2.0 * k - levels - 1.0) * d / 2.0;
        const double a = k == 1 ? -std::numeric_limits<double>::infinity() : (k - half - 1) * d;
        const double b = k == levels ? std::numeric_limits<double>::infinity() : (k - half) * d;
        const double pa = std::isinf(a) ? 0.0 : phi(a);
        const double pb = std::isinf(b) ? 0.0 : phi(b);
        const double apa = std::isinf(a) ? 0.0 : a * pa;
        const double bpb = std::isinf(b) ? 0.0 : b * pb;
        total += (cdf(b) - cdf(a)) * (1.0 + r * r) - (bpb - apa) - 2.0 * r * (pa - pb);
    }
    return total;
}

double golden_min(int bits, double lo, double hi)
{
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    for (int i = 0; i < 200; ++i) {
        const double c = b - g * (b - a);
        const double d = a + g * (b - a);
        if (quantizer_mse(bits, c) < quantizer_mse(bits, d)) {
            b = d;
        } else {
            a = c;
        }
    }
    return 0.5 * (a + b);
}

} // namespace

TEST_CASE("QPSK pilots are unit modulus and seed-deterministic")
{
    Rng a = make_stream(1, 0);
    Rng b = make_stream(1, 0);
    const auto p = make_pilots(PilotKind::Qpsk, 16, 8, a);
    CHECK(p.n_tx() == 16);
    CHECK(p.n_pilot() == 8);
    CHECK((p.symbols.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-15);
    for (Index i = 0; i < p.symbols.size(); ++i) {
        CHECK(std::abs(std::abs(p.symbols.data()[i].real()) - 1.0 / std::sqrt(2.0)) < 1e-15);
    }
    CHECK(make_pilots(PilotKind::Qpsk, 16, 8, b).symbols == p.symbols);
}

TEST_CASE("Zadoff-Chu pilots are orthogonal at full density")
{
    Rng rng = make_stream(1, 0);
    for (int n : {7, 16, 64}) {
        const auto p = make_pilots(PilotKind::ZadoffChu, n, n, rng);
        CHECK((p.symbols.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-12);
        const CMat gram = p.symbols.adjoint() * p.symbols;
        CHECK((gram - n * CMat::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
    }
    CHECK_THROWS_AS(make_pilots(PilotKind::ZadoffChu, 8, 9, rng), InvalidArgument);
}

TEST_CASE("scalar measurement matrix")
{
    PilotMatrix p;
    p.symbols.resize(1, 1);
    p.symbols(0, 0) = Complex(0.6, -0.8);
    const auto m = build_measurement(p, 1);
    Mat expected(2, 2);
    expected << 0.6, 0.8, -0.8, 0.6;
    CHECK((m.a() - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("real measurement pipeline reproduces the complex received signal")
{
    Rng rng = make_stream(2, 0);
    for (auto [nr, nt, np] : {std::tuple{4, 16, 16}, std::tuple{3, 8, 4}, std::tuple{2, 5, 9}}) {
        const auto pilots = make_pilots(PilotKind::Qpsk, nt, np, rng);
        const auto model = build_measurement(pilots, nr);
        CHECK(model.measurement_dim() == 2 * nr * np);
        CHECK(model.channel_dim() == 2 * nr * nt);
        const CMat h = random_complex(nr, nt, rng);
        const Vec via_model = model.a() * vectorize_real(to_angular(h));
        const Vec direct = vectorize_real(h * pilots.symbols);
        CHECK((via_model - direct).norm() < 1e-9);
    }
}

TEST_CASE("ZC pilots at alpha = 1 give row-orthogonal A")
{
    Rng rng = make_stream(3, 0);
    const auto model = build_measurement(make_pilots(PilotKind::ZadoffChu, 16, 16, rng), 4);
    const Mat g = model.a() * model.a().transpose();
    const Mat off = g - Mat(g.diagonal().asDiagonal());
    CHECK(off.norm() <= 1e-9 * g.diagonal().norm());
}

TEST_CASE("cached SVD reconstructs A")
{
    Rng rng = make_stream(4, 0);
    for (int np : {8, 16, 24}) {
        const auto model = build_measurement(make_pilots(PilotKind::Qpsk, 16, np, rng), 4);
        const auto& op = model.op();
        const Mat rec = op.u() * op.singular_values().asDiagonal() * op.v().transpose();
        CHECK((rec - op.a()).norm() / op.a().norm() <= 1e-10);
        const Vec& s = op.singular_values();
        CHECK(s.minCoeff() >= 0.0);
        for (Index i = 1; i < s.size(); ++i) {
            CHECK(s[i] <= s[i - 1]);
        }
        CHECK((op.row_norms_sq() - op.a().rowwise().squaredNorm()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("noise variance from SNR")
{
    CHECK(noise_variance_from_snr(30.0, 64) == doctest::Approx(0.032).epsilon(1e-12));
    CHECK(noise_variance_from_snr(0.0, 16) == doctest::Approx(8.0));
    Rng rng = make_stream(5, 0);
    const auto m = build_measurement(make_pilots(PilotKind::Qpsk, 64, 64, rng), 1).with_snr_db(30.0);
    CHECK(m.noise_var() == doctest::Approx(0.032));
}

TEST_CASE("observe: noiseless and noise moments")
{
    Rng rng = make_stream(6, 0);
    const auto base = build_measurement(make_pilots(PilotKind::Qpsk, 4, 4, rng), 2);
    const Vec h = standard_normal(base.channel_dim(), rng);
    const auto clean = observe(base, h, rng);
    CHECK(clean.y == base.a() * h);
    CHECK(!clean.quantized());

    const auto noisy = base.with_noise_var(0.37);
    double sum = 0.0, sum_sq = 0.0;
    long count = 0;
    const Vec ah = base.a() * h;
    for (int k = 0; k < 100000 / static_cast<int>(ah.size()) + 1; ++k) {
        const Vec n = observe(noisy, h, rng).y - ah;
        sum += n.sum();
        sum_sq += n.squaredNorm();
        count += n.size();
    }
    REQUIRE(count >= 100000);
    const double mean = sum / count;
    const double var = sum_sq / count - mean * mean;
    CHECK(std::abs(var - 0.37) <= 0.02 * 0.37);
    CHECK_THROWS_AS(observe(base, Vec::Zero(3), rng), InvalidArgument);
}

TEST_CASE("mid-rise quantizer codewords and cells")
{
    const Quantizer q2(2, 1.0);
    CHECK(q2.codewords() == std::vector<double>{-1.5, -0.5, 0.5, 1.5});
    CHECK(q2.quantize(0.3) == 0.5);
    CHECK(q2.interval(0.5) == std::pair<double, double>{0.0, 1.0});
    CHECK(q2.quantize(-1e6) == -1.5);
    CHECK(q2.quantize(1e6) == 1.5);
    CHECK(q2.interval(-1.5).first == -std::numeric_limits<double>::infinity());
    CHECK(q2.interval(1.5).second == std::numeric_limits<double>::infinity());
    CHECK(q2.quantize(0.0) == 0.5);  // cells are closed below
    CHECK_THROWS_AS(q2.interval(0.25), InvalidArgument);

    const Quantizer q1(1, 0.8);
    CHECK(q1.quantize(-3.0) == -0.4);
    CHECK(q1.quantize(1e-9) == 0.4);
    CHECK(q1.codewords().size() == 2);

    CHECK_THROWS_AS(Quantizer(0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(Quantizer(9, 1.0), InvalidArgument);
    CHECK_THROWS_AS(Quantizer(2, 0.0), InvalidArgument);
}

TEST_CASE("quantizer cells partition the real line")
{
    Rng rng = make_stream(7, 0);
    std::normal_distribution<double> g(0.0, 3.0);
    for (int b = 1; b <= 8; ++b) {
        const Quantizer q(b, 0.37);
        for (int k = 1; k < q.levels(); ++k) {
            CHECK(q.cell_interval(k).second == q.cell_interval(k + 1).first);
            CHECK(q.cell_interval(k).first < q.cell_interval(k).second);
        }
        for (int i = 0; i < 2000; ++i) {
            const double z = g(rng);
            const double c = q.quantize(z);
            const auto [lo, up] = q.interval(c);
            CHECK((lo <= z && z < up));
            CHECK(q.codewords()[static_cast<std::size_t>(q.index_of(c) - 1)] == c);
        }
    }
}

TEST_CASE("tabulated step sizes minimise the Gaussian quantization MSE")
{
    for (int b = 1; b <= 8; ++b) {
        const double tab = gaussian_optimal_step(b);
        const double opt = golden_min(b, 1e-3, 3.0);
        CHECK_MESSAGE(std::abs(tab - opt) <= 1e-6 * opt, "bits = " << b << " table " << tab << " oracle " << opt);
    }
    CHECK_THROWS_AS(gaussian_optimal_step(0), InvalidArgument);
    CHECK_THROWS_AS(gaussian_optimal_step(9), InvalidArgument);
}

TEST_CASE("design_quantizer scales with received power")
{
    const Quantizer q = design_quantizer(3, 8.0);
    CHECK(q.step() == doctest::Approx(2.0 * gaussian_optimal_step(3)));
    CHECK(design_quantizer(1, 2.0).codewords()[1] == doctest::Approx(gaussian_optimal_step(1) / 2.0));
    CHECK_THROWS_AS(design_quantizer(3, 0.0), InvalidArgument);
    CHECK_THROWS_AS(design_quantizer(12, 1.0), InvalidArgument);

    Vec y(4);
    y << 1.0, 2.0, 3.0, 4.0;  // two complex entries, total power 30
    CHECK(received_power(y) == doctest::Approx(15.0));
}

TEST_CASE("quantized observations hold codewords")
{
    Rng rng = make_stream(8, 0);
    const auto m = build_measurement(make_pilots(PilotKind::Qpsk, 8, 8, rng), 2).with_snr_db(10.0);
    const auto raw = observe(m, standard_normal(m.channel_dim(), rng), rng);
    const Quantizer q = design_quantizer(2, received_power(raw.y));
    const auto qo = quantize_observation(raw, q);
    CHECK(qo.quantized());
    for (Index i = 0; i < qo.y.size(); ++i) {
        CHECK_NOTHROW(q.index_of(qo.y[i]));
    }
    CHECK_THROWS_AS(quantize_observation(qo, q), InvalidArgument);
}
