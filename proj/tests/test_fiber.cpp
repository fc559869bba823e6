#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ymh/fiber.hpp"

using namespace ymh;

namespace {

Vec3 random_sphere_point(std::mt19937_64& rng) {
    std::normal_distribution<double> d(0.0, 1.0);
    while (true) {
        Vec3 p{d(rng), d(rng), d(rng)};
        if (norm(p) > 0.1) return project(FiberModel::sphere(), p);
    }
}

Vec3 random_point(const FiberModel& m, std::mt19937_64& rng) {
    if (m.kind == FiberKind::Sphere) return random_sphere_point(rng);
    std::normal_distribution<double> d(0.0, 1.0);
    return {d(rng), d(rng), 0.0};
}

Vec3 random_tangent(const FiberModel& m, const Vec3& p, std::mt19937_64& rng) {
    std::normal_distribution<double> d(0.0, 1.0);
    Vec3 v{d(rng), d(rng), m.kind == FiberKind::Sphere ? d(rng) : 0.0};
    return tangent_project(m, p, v);
}

} // namespace

TEST_CASE("project: sphere radial projection and degenerate origin") {
    FiberModel s = FiberModel::sphere();
    Vec3 p = project(s, Vec3{0, 0, 2});
    CHECK(p.x == 0.0);
    CHECK(p.y == 0.0);
    CHECK(p.z == 1.0);
    CHECK_THROWS_AS(project(s, Vec3{0, 0, 0}), DegeneratePoint);

    FiberModel pl = FiberModel::plane();
    Vec3 q = project(pl, Vec3{3, -4, 0});
    CHECK(q.x == 3.0);
    CHECK(q.y == -4.0);
}

TEST_CASE("tangent_project removes the normal component") {
    FiberModel s = FiberModel::sphere();
    Vec3 t = tangent_project(s, Vec3{0, 0, 1}, Vec3{1, 2, 3});
    CHECK(t.x == 1.0);
    CHECK(t.y == 2.0);
    CHECK(t.z == 0.0);
    Vec3 z = tangent_project(s, Vec3{0, 0, 1}, Vec3{0, 0, 5});
    CHECK(norm(z) == 0.0);

    FiberModel pl = FiberModel::plane();
    Vec3 v = tangent_project(pl, Vec3{1, 1, 0}, Vec3{-2, 7, 0});
    CHECK(v.x == -2.0);
    CHECK(v.y == 7.0);
}

TEST_CASE("action field is the rotation generator") {
    Vec3 a = action_field(Vec3{1, 0, 0});
    CHECK(a.x == 0.0);
    CHECK(a.y == 1.0);
    CHECK(a.z == 0.0);
    CHECK(norm(action_field(Vec3{0, 0, 1})) == 0.0); // pole is a fixed point
    Vec3 b = action_field(Vec3{1, 0, 0});
    CHECK(b.y == 1.0);
}

TEST_CASE("action field is tangent on the sphere") {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 50; ++i) {
        Vec3 p = random_sphere_point(rng);
        CHECK(dot(action_field(p), p) == 0.0);
    }
}

TEST_CASE("moment map values") {
    FiberModel s = FiberModel::sphere();
    CHECK(moment(s, Vec3{0, 0, 1}) == 1.0);
    CHECK(moment(s, Vec3{1, 0, 0}) == 0.0);
    FiberModel pl = FiberModel::plane();
    CHECK(moment(pl, Vec3{3, 4, 0}) == 12.5);
}

TEST_CASE("moment gradient values") {
    FiberModel s = FiberModel::sphere();
    CHECK(norm(moment_gradient(s, Vec3{0, 0, 1})) == 0.0);
    Vec3 g = moment_gradient(s, Vec3{1, 0, 0});
    CHECK(g.x == 0.0);
    CHECK(g.y == 0.0);
    CHECK(g.z == 1.0);
    Vec3 gp = moment_gradient(FiberModel::plane(), Vec3{3, 4, 0});
    CHECK(gp.x == 3.0);
    CHECK(gp.y == 4.0);
}

TEST_CASE("moment gradient equals the tangent projection of the ambient gradient") {
    FiberModel s = FiberModel::sphere();
    std::mt19937_64 rng(4);
    for (int i = 0; i < 50; ++i) {
        Vec3 p = random_sphere_point(rng);
        Vec3 a = moment_gradient(s, p);
        Vec3 b = tangent_project(s, p, Vec3{0, 0, 1});
        CHECK(a.x == b.x);
        CHECK(a.y == b.y);
        CHECK(a.z == b.z);
    }
}

TEST_CASE("moment gradient is the riemannian gradient (finite differences along geodesics)") {
    std::mt19937_64 rng(6);
    const double eta = 1e-6;
    for (FiberModel m : {FiberModel::sphere(), FiberModel::plane()}) {
        for (int i = 0; i < 100; ++i) {
            Vec3 p = random_point(m, rng);
            Vec3 v = random_tangent(m, p, rng);
            const double dmu =
                (moment(m, exp_map(m, p, v * eta)) - moment(m, exp_map(m, p, v * -eta))) / (2 * eta);
            CHECK(dmu == Catch::Approx(dot(moment_gradient(m, p), v)).margin(1e-8));
        }
    }
}

TEST_CASE("hamiltonian compatibility: d(moment) = omega(action_field, .)") {
    std::mt19937_64 rng(8);
    const double eta = 1e-6;
    for (FiberModel m : {FiberModel::sphere(), FiberModel::plane()}) {
        for (int i = 0; i < 100; ++i) {
            Vec3 p = random_point(m, rng);
            Vec3 v = random_tangent(m, p, rng);
            const double dmu =
                (moment(m, exp_map(m, p, v * eta)) - moment(m, exp_map(m, p, v * -eta))) / (2 * eta);
            CHECK(dmu == Catch::Approx(symplectic_form(m, p, action_field(p), v)).margin(1e-8));
        }
    }
}

TEST_CASE("moment is invariant under the circle action") {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> angle(-10.0, 10.0);
    for (FiberModel m : {FiberModel::sphere(), FiberModel::plane()}) {
        for (int i = 0; i < 50; ++i) {
            Vec3 p = random_point(m, rng);
            const double th = angle(rng);
            CHECK(moment(m, rotate_action(p, th)) == Catch::Approx(moment(m, p)).margin(1e-12));
        }
    }
}

TEST_CASE("projection keeps sphere points unit to rounding") {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 100; ++i) {
        Vec3 p = random_sphere_point(rng);
        CHECK(std::abs(norm(p) - 1.0) <= 1e-12);
    }
}
