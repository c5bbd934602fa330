#include <doctest.h>

#include "aropf/errors.hpp"
#include "test_support.hpp"

using namespace aropf;
using aropf::testing::bundled;
using aropf::testing::make_grid;

namespace {

const char* kSingle = R"(
name = one
[base]
s_base = 1e6
v_base = 1e3
[grid]
v0 = 1
[line 1]
up = 0
r = 0.01
x = 0.02
b = 0.001
i_max_sq = 2
[bus 1]
p = 0.1
q = 0.05
)";

std::string with_lines(const std::string& lines) {
    return "[base]\ns_base = 1e6\nv_base = 1e3\n[grid]\nv0 = 1\n" + lines;
}

std::string line(const std::string& id, const std::string& up) {
    return "[line " + id + "]\nup = " + up + "\nr = 0.01\nx = 0.01\nb = 0.001\ni_max_sq = 1\n";
}

}  // namespace

TEST_CASE("threebus file parses to the per-unit cable model") {
    const RadialGrid g = bundled("threebus");
    REQUIRE(g.size() == 3);
    CHECK(g.v0 == 1.0);
    // Z_base = 24.9 kV^2 / 5 MVA = 124.002 ohm, 50 Hz
    for (const Line& ln : g.lines) {
        CHECK(ln.r == doctest::Approx(0.001556426509249851).epsilon(1e-12));
        CHECK(ln.x == doctest::Approx(0.0009627306078644873).epsilon(1e-12));
        CHECK(ln.b == doctest::Approx(0.004674765266765298).epsilon(1e-12));
    }
    CHECK(g.lines[0].up == 0);
    CHECK(g.lines[1].up == 1);
    CHECK(g.lines[2].up == 2);
    CHECK(g.buses[0].p_min == -0.21);
    CHECK(g.buses[2].p_max == 0.3);
}

TEST_CASE("single line file") {
    const RadialGrid g = parse_grid(kSingle);
    REQUIRE(g.size() == 1);
    CHECK(g.lines[0].up == 0);
    CHECK(g.buses[0].q_max == 0.05);
}

TEST_CASE("tree violations are rejected") {
    SUBCASE("two parents") {
        CHECK_THROWS_AS(parse_grid(with_lines(line("1", "0") + line("2", "1") + line("3", "1") + line("2", "3"))),
                        ValidationError);
    }
    SUBCASE("cycle") { CHECK_THROWS_AS(parse_grid(with_lines(line("1", "2") + line("2", "1"))), ValidationError); }
    SUBCASE("second line at the slack") {
        CHECK_THROWS_AS(parse_grid(with_lines(line("1", "0") + line("2", "0"))), ValidationError);
    }
    SUBCASE("unknown upstream bus") {
        CHECK_THROWS_AS(parse_grid(with_lines(line("1", "0") + line("2", "7"))), ValidationError);
    }
}

TEST_CASE("syntax errors carry the line number") {
    try {
        parse_grid(with_lines("[line 1]\nup = 0\nr = abc\n"));
        FAIL("no error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 8);
        CHECK(e.field() == "r");
    }
}

TEST_CASE("zero shunt needs the permissive mode") {
    const std::string text = with_lines("[line 1]\nup = 0\nr = 0.01\nx = 0.01\nb = 0\ni_max_sq = 1\n");
    CHECK_THROWS(parse_grid(text));
    GridOptions opts;
    opts.allow_zero_shunt = true;
    CHECK(parse_grid(text, opts).lines[0].b == 0.0);
}

TEST_CASE("external labels are relabelled parent-first") {
    const RadialGrid g =
        parse_grid("[base]\ns_base = 1\nv_base = 1\n[grid]\nslack = 800\n" + line("802", "800") + line("806", "802") +
                   line("810", "802") + line("808", "806"));
    REQUIRE(g.size() == 4);
    CHECK(g.labels[0] == "800");
    for (int k = 0; k < 4; ++k) CHECK(g.lines[k].up < g.lines[k].id);
    CHECK(g.lines[g.index_of_label("808") - 1].up == g.index_of_label("806"));
    CHECK(g.lines[g.index_of_label("810") - 1].up == g.index_of_label("802"));
}

TEST_CASE("to_per_unit") {
    PerUnitBase base;
    base.s_base = 5e6;
    base.v_base = 24.9e3;
    base.f_base = 50;
    const PerUnitLine one = to_per_unit(0.193, 0.38, 0.24, 1.0, base);
    CHECK(base.z_base() == doctest::Approx(124.002));
    CHECK(one.r == doctest::Approx(0.001556426509249851).epsilon(1e-14));
    const PerUnitLine two = to_per_unit(0.193, 0.38, 0.24, 2.0, base);
    CHECK(two.r == 2 * one.r);
    CHECK(two.x == 2 * one.x);
    CHECK(two.b == 2 * one.b);
    CHECK_THROWS(to_per_unit(0.193, 0.38, 0.24, 0.0, base));
    CHECK_THROWS(to_per_unit(-0.193, 0.38, 0.24, 1.0, base));

    const PhysicalLine back = from_per_unit(one, 1.0, base);
    CHECK(back.r_ohm_per_km == doctest::Approx(0.193).epsilon(1e-12));
    CHECK(back.l_mh_per_km == doctest::Approx(0.38).epsilon(1e-12));
    CHECK(back.c_uf_per_km == doctest::Approx(0.24).epsilon(1e-12));
}

TEST_CASE("adjacency and closure") {
    SUBCASE("chain") {
        const RadialGrid g = make_grid({0, 1, 2}, 0.01, 0.01, 0.0);
        const Eigen::MatrixXd G = adjacency(g), H = closure(G);
        Eigen::MatrixXd Ge = Eigen::MatrixXd::Zero(3, 3);
        Ge(0, 1) = Ge(1, 2) = 1;
        CHECK(G == Ge);
        Eigen::MatrixXd He = Eigen::MatrixXd::Zero(3, 3);
        He.triangularView<Eigen::Upper>().setOnes();
        CHECK(H == He);
    }
    SUBCASE("star") {
        const RadialGrid g = make_grid({0, 1, 1}, 0.01, 0.01, 0.0);
        const Eigen::MatrixXd G = adjacency(g), H = closure(G);
        CHECK(G(0, 1) == 1);
        CHECK(G(0, 2) == 1);
        CHECK(G.sum() == 2);
        CHECK(H(0, 1) == 1);
        CHECK(H(0, 2) == 1);
        CHECK(H(1, 2) == 0);
    }
    SUBCASE("single line") {
        const RadialGrid g = make_grid({0}, 0.01, 0.01, 0.0);
        CHECK(adjacency(g) == Eigen::MatrixXd::Zero(1, 1));
        CHECK(closure(adjacency(g)) == Eigen::MatrixXd::Identity(1, 1));
    }
}

TEST_CASE("closure identities on every bundled grid") {
    for (const char* name : {"threebus", "ieee34", "cigre_mv"}) {
        CAPTURE(name);
        const RadialGrid g = bundled(name);
        const int L = g.size();
        const Eigen::MatrixXd G = adjacency(g), H = closure(G);
        const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(L, L);
        CHECK((H * (I - G)) == I);
        CHECK(((I - G) * H) == I);
        Eigen::MatrixXd Gp = I;
        Eigen::MatrixXd series = Eigen::MatrixXd::Zero(L, L);
        for (int n = 0; n < L; ++n) {
            series += Gp;
            Gp = Gp * G;
        }
        CHECK(Gp.isZero());
        CHECK(series == H);
        CHECK((H.array() >= G.array()).all());
        CHECK((G.array() >= 0).all());
        CHECK(((H - I).array() >= 0).all());
    }
}

TEST_CASE("bundled benchmark assembly") {
    const RadialGrid ieee = bundled("ieee34");
    CHECK(ieee.size() == 31);
    CHECK(ieee.labels[0] == "800");
    CHECK(ieee.base.current_base() == doctest::Approx(5e6 / (std::sqrt(3.0) * 24.9e3)));
    const RadialGrid cig = bundled("cigre_mv");
    CHECK(cig.size() == 11);
    CHECK(cig.lines[0].shunt_free);
    CHECK(cig.lines[0].b == 0.0);
    CHECK(std::sqrt(cig.lines[0].i_max_sq) * cig.base.current_base() == doctest::Approx(974.2786));
}

TEST_CASE("length scaling and shunt removal") {
    const RadialGrid g = bundled("threebus");
    const RadialGrid g2 = scale_lengths(g, 2.0);
    for (int k = 0; k < 3; ++k) {
        CHECK(g2.lines[k].r == doctest::Approx(2 * g.lines[k].r));
        CHECK(g2.lines[k].b == doctest::Approx(2 * g.lines[k].b));
        CHECK(g2.lines[k].length_km == doctest::Approx(2 * g.lines[k].length_km));
    }
    for (const Line& ln : without_shunts(g).lines) CHECK(ln.b == 0.0);
}
