#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nspolar/oracle.hpp"
#include "nspolar/rng.hpp"

using namespace nspolar;

namespace {

DiscreteChannel random_generic_channel(Rng& rng, size_t outputs) {
    std::vector<double> r0(outputs), r1(outputs);
    double s0 = 0, s1 = 0;
    for (size_t y = 0; y < outputs; ++y) {
        r0[y] = 0.05 + rng.u01();
        r1[y] = 0.05 + rng.u01();
        s0 += r0[y];
        s1 += r1[y];
    }
    for (size_t y = 0; y < outputs; ++y) {
        r0[y] /= s0;
        r1[y] /= s1;
    }
    return DiscreteChannel(std::move(r0), std::move(r1));
}

DiscreteChannel random_channel(Rng& rng) {
    switch (rng.bounded(4)) {
        case 0: return DiscreteChannel::from_model(ChannelModel::bec(rng.u01()));
        case 1: return DiscreteChannel::from_model(ChannelModel::bsc(0.5 * rng.u01()));
        case 2:
            return DiscreteChannel::from_model(
                ChannelModel::bac(0.95 * rng.u01(), 0.95 * rng.u01()));
        default: return random_generic_channel(rng, 2 + rng.bounded(3));
    }
}

}  // namespace

TEST_CASE("transition rows validated") {
    CHECK_THROWS_AS(DiscreteChannel({0.5, 0.4}, {0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(DiscreteChannel({1.2, -0.2}, {0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(DiscreteChannel({0.5, 0.5}, {1.0}), std::invalid_argument);
}

TEST_CASE("single step on erased halves") {
    const auto bec = DiscreteChannel::from_model(ChannelModel::bec(0.5));
    auto [up, dn] = single_step(bec, bec);
    CHECK(up.capacity() == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(dn.capacity() == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(up.bhattacharyya() == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(dn.bhattacharyya() == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("single step W'' Bhattacharyya is the exact product") {
    const auto bsc = DiscreteChannel::from_model(ChannelModel::bsc(0.1));
    auto [up, dn] = single_step(bsc, bsc);
    // 8-entry table summed by the generic definition
    CHECK(dn.bhattacharyya() == doctest::Approx(0.36).epsilon(1e-13));
    CHECK(dn.alphabet_size() == 8);
    CHECK(up.alphabet_size() == 4);
}

TEST_CASE("capacity conservation over random pairs") {
    Rng rng(101);
    for (int t = 0; t < 100; ++t) {
        const auto w0 = random_channel(rng);
        const auto w1 = random_channel(rng);
        auto [up, dn] = single_step(w0, w1);
        CHECK(std::fabs(up.capacity() + dn.capacity() - w0.capacity() - w1.capacity()) < 1e-10);
        // polarization ordering
        CHECK(up.capacity() <= std::min(w0.capacity(), w1.capacity()) + 1e-10);
        CHECK(dn.capacity() >= std::max(w0.capacity(), w1.capacity()) - 1e-10);
    }
}

TEST_CASE("Bhattacharyya single-step bounds and equality characterizations") {
    Rng rng(202);
    for (int t = 0; t < 200; ++t) {
        const auto w0 = random_channel(rng);
        const auto w1 = random_channel(rng);
        auto [up, dn] = single_step(w0, w1);
        const double z0 = w0.bhattacharyya(), z1 = w1.bhattacharyya();
        CHECK(dn.bhattacharyya() == doctest::Approx(z0 * z1).epsilon(1e-12));
        CHECK(up.bhattacharyya() <= z0 + z1 - z0 * z1 + 1e-10);
        CHECK(up.bhattacharyya() >=
              std::sqrt(z0 * z0 + z1 * z1 - z0 * z0 * z1 * z1) - 1e-10);
    }

    // upper bound tight iff one side is a BEC
    Rng rng2(203);
    for (int t = 0; t < 40; ++t) {
        const auto bec = DiscreteChannel::from_model(ChannelModel::bec(rng2.u01()));
        const auto other = random_channel(rng2);
        auto [up, dn] = single_step(bec, other);
        const double z0 = bec.bhattacharyya(), z1 = other.bhattacharyya();
        CHECK(up.bhattacharyya() == doctest::Approx(z0 + z1 - z0 * z1).epsilon(1e-10));
    }
    // lower bound tight iff both sides are BSCs
    for (int t = 0; t < 40; ++t) {
        const auto a = DiscreteChannel::from_model(ChannelModel::bsc(0.5 * rng2.u01()));
        const auto b = DiscreteChannel::from_model(ChannelModel::bsc(0.5 * rng2.u01()));
        auto [up, dn] = single_step(a, b);
        const double z0 = a.bhattacharyya(), z1 = b.bhattacharyya();
        CHECK(up.bhattacharyya() ==
              doctest::Approx(std::sqrt(z0 * z0 + z1 * z1 - z0 * z0 * z1 * z1)).epsilon(1e-10));
    }
    // strict on clearly asymmetric pairs (away from the Z = 1 degeneracy)
    for (int t = 0; t < 40; ++t) {
        const auto a = DiscreteChannel::from_model(
            ChannelModel::bac(0.05 + 0.2 * rng2.u01(), 0.35 + 0.2 * rng2.u01()));
        const auto b = DiscreteChannel::from_model(
            ChannelModel::bac(0.35 + 0.2 * rng2.u01(), 0.05 + 0.2 * rng2.u01()));
        auto [up, dn] = single_step(a, b);
        const double z0 = a.bhattacharyya(), z1 = b.bhattacharyya();
        CHECK(up.bhattacharyya() < z0 + z1 - z0 * z1 - 1e-10);
        CHECK(up.bhattacharyya() >
              std::sqrt(z0 * z0 + z1 * z1 - z0 * z0 * z1 * z1) + 1e-10);
    }
}

TEST_CASE("BEC structural detection") {
    CHECK(DiscreteChannel::from_model(ChannelModel::bec(0.3)).as_bec() ==
          doctest::Approx(0.3));
    CHECK_FALSE(DiscreteChannel::from_model(ChannelModel::bsc(0.1)).as_bec().has_value());
    CHECK_FALSE(DiscreteChannel::from_model(ChannelModel::bac(0.2, 0.1)).as_bec().has_value());
    // BSC(0) degenerates to a perfect channel, i.e. BEC(0)
    CHECK(DiscreteChannel::from_model(ChannelModel::bsc(0.0)).as_bec() == doctest::Approx(0.0));
}

TEST_CASE("polarize_exact matches the closed forms for the quadruple") {
    const std::vector<DiscreteChannel> chans = {
        DiscreteChannel::from_model(ChannelModel::bec(0.4)),
        DiscreteChannel::from_model(ChannelModel::bec(0.1)),
        DiscreteChannel::from_model(ChannelModel::bec(0.3)),
        DiscreteChannel::from_model(ChannelModel::bec(0.2))};
    // channel order is already the [0,3,1,2] arrangement of (0.4,0.3,0.2,0.1)
    const auto out = polarize_exact(chans);
    CHECK(out[1].bhattacharyya() == doctest::Approx(0.0976).epsilon(1e-12));
    CHECK(out[3].bhattacharyya() == doctest::Approx(0.0024).epsilon(1e-12));
    CHECK(out[2].bhattacharyya() == doctest::Approx(0.46 * 0.44).epsilon(1e-12));
}

TEST_CASE("polarize_exact identical channels equal the regular polar code") {
    const std::vector<DiscreteChannel> chans(4,
                                             DiscreteChannel::from_model(ChannelModel::bsc(0.2)));
    const auto out = polarize_exact(chans);
    // regular N=4 BSC(0.2): two polarization levels of the same channel
    auto [w1u, w1d] = single_step(chans[0], chans[0]);
    auto [w2uu, ignored1] = single_step(w1u, w1u);
    auto [ignored2, w2dd] = single_step(w1d, w1d);
    CHECK(out[0].capacity() == doctest::Approx(w2uu.capacity()).epsilon(1e-12));
    CHECK(out[3].capacity() == doctest::Approx(w2dd.capacity()).epsilon(1e-12));
}

TEST_CASE("polarizing with a perfect channel") {
    const auto perfect = DiscreteChannel::from_model(ChannelModel::bec(0.0));
    const auto other = DiscreteChannel::from_model(ChannelModel::bec(0.35));
    const auto out = polarize_exact({other, perfect});
    CHECK(out[0].capacity() == doctest::Approx(other.capacity()).epsilon(1e-12));
    CHECK(out[1].capacity() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("alphabet cap guards the exact transform") {
    Rng rng(55);
    const auto big = random_generic_channel(rng, 800);
    CHECK_THROWS_AS(single_step(big, big), std::length_error);
}

TEST_CASE("permutation classes") {
    const std::vector<DiscreteChannel> generic = {
        DiscreteChannel::from_model(ChannelModel::bec(0.41)),
        DiscreteChannel::from_model(ChannelModel::bec(0.29)),
        DiscreteChannel::from_model(ChannelModel::bec(0.17)),
        DiscreteChannel::from_model(ChannelModel::bec(0.05))};
    const auto classes = permutation_classes(generic);
    CHECK(classes.size() == 3);
    size_t members = 0;
    for (const auto& c : classes) members += c.members.size();
    CHECK(members == 24);

    CHECK(permutation_classes(std::vector<DiscreteChannel>(
                                  4, DiscreteChannel::from_model(ChannelModel::bec(0.3))))
              .size() == 1);

    const std::vector<DiscreteChannel> pair = {
        DiscreteChannel::from_model(ChannelModel::bec(0.6)),
        DiscreteChannel::from_model(ChannelModel::bsc(0.2))};
    CHECK(permutation_classes(pair).size() == 1);
}

TEST_CASE("best permutation at the quarter, half and full rates") {
    const std::vector<DiscreteChannel> chans = {
        DiscreteChannel::from_model(ChannelModel::bec(0.45)),
        DiscreteChannel::from_model(ChannelModel::bec(0.30)),
        DiscreteChannel::from_model(ChannelModel::bec(0.20)),
        DiscreteChannel::from_model(ChannelModel::bec(0.10))};
    const std::vector<uint32_t> pi3{0, 3, 1, 2};

    const auto best2 = best_permutation(chans, 2);
    CHECK(permutation_objective(chans, best2, 2) ==
          doctest::Approx(permutation_objective(chans, pi3, 2)).epsilon(1e-12));

    // full rate: conservation ties every ordering
    const auto best4 = best_permutation(chans, 4);
    CHECK(permutation_objective(chans, best4, 4) ==
          doctest::Approx(permutation_objective(chans, pi3, 4)).epsilon(1e-12));
    CHECK(best4 == std::vector<uint32_t>{0, 1, 2, 3});

    // rate 1/4: the best synthesized channel is shared by all orderings
    const auto best1 = best_permutation(chans, 1);
    CHECK(permutation_objective(chans, best1, 1) ==
          doctest::Approx(permutation_objective(chans, pi3, 1)).epsilon(1e-12));
}

TEST_CASE("appendix orderings hold on random descending quadruples") {
    Rng rng(77);
    for (int t = 0; t < 50; ++t) {
        std::array<double, 4> e{rng.u01(), rng.u01(), rng.u01(), rng.u01()};
        std::sort(e.begin(), e.end(), std::greater<>());
        std::vector<DiscreteChannel> base;
        for (double v : e) base.push_back(DiscreteChannel::from_model(ChannelModel::bec(v)));

        auto z_for = [&](std::vector<uint32_t> perm) {
            std::vector<DiscreteChannel> ordered;
            for (uint32_t p : perm) ordered.push_back(base[p]);
            auto polarized = polarize_exact(ordered);
            std::vector<double> z;
            for (const auto& w : polarized) z.push_back(w.bhattacharyya());
            return z;
        };
        const auto z1 = z_for({0, 1, 2, 3});
        const auto z2 = z_for({0, 2, 1, 3});
        const auto z3 = z_for({0, 3, 1, 2});
        for (const auto& z : {z1, z2, z3}) {
            CHECK(z[3] <= std::min(z[1], z[2]) + 1e-12);
            CHECK(std::max(z[1], z[2]) <= z[0] + 1e-12);
        }
        CHECK(z3[1] <= std::min({z1[1], z1[2], z2[1], z2[2]}) + 1e-12);
    }
}
