#include <catch2/catch_amalgamated.hpp>

#include "pedsynth/optics.hpp"
#include "pedsynth/rng.hpp"

using namespace pedsynth;

namespace {

CameraRig axis_rig(int w = 1000, int h = 1000, double fov = 90.0) {
    CameraRig rig;
    rig.id = "test";
    rig.position = {0, 0, 0};
    rig.look_at = {0, 0, 10};
    rig.vertical_fov_deg = fov;
    rig.width = w;
    rig.height = h;
    rig.near_m = 0.1;
    rig.far_m = 100.0;
    return rig;
}

} // namespace

TEST_CASE("optical-axis point projects to the principal point") {
    const CameraRig rig = axis_rig();
    const auto p = project(rig, {0, 0, 5});
    REQUIRE(p.has_value());
    CHECK(p->u == Catch::Approx(500.0));
    CHECK(p->v == Catch::Approx(500.0));
    CHECK(p->depth == Catch::Approx(5.0));
}

TEST_CASE("90-degree fov: 1 m offset at 1 m depth lands half a frame out") {
    // f = (h/2)/tan(45 deg) = 500 px, so u = w/2 + 500
    const CameraRig rig = axis_rig(1000, 1000, 90.0);
    const auto p = project(rig, {1, 0, 1});
    REQUIRE(p.has_value());
    CHECK(p->u == Catch::Approx(1000.0));
    CHECK(p->v == Catch::Approx(500.0));
}

TEST_CASE("behind-camera points are signaled distinctly") {
    const CameraRig rig = axis_rig();
    CHECK(!project(rig, {0, 0, -1}).has_value());
    CHECK_THROWS_AS(project(rig, rig.position), ValidationError);
}

TEST_CASE("projection scales linearly with resolution") {
    const CameraRig rig1 = axis_rig(640, 360, 60.0);
    CameraRig rig2 = rig1;
    rig2.width *= 2;
    rig2.height *= 2;
    const Vec3 pt{0.7, -0.3, 4.0};
    const auto a = project(rig1, pt);
    const auto b = project(rig2, pt);
    REQUIRE(a.has_value());
    REQUIRE(b.has_value());
    CHECK(b->u - rig2.width / 2.0 == Catch::Approx(2.0 * (a->u - rig1.width / 2.0)));
    CHECK(b->v - rig2.height / 2.0 == Catch::Approx(2.0 * (a->v - rig1.height / 2.0)));
}

TEST_CASE("frustum test combines image bounds and depth range") {
    const CameraRig rig = axis_rig();
    CHECK(in_frustum(rig, {0, 0, (rig.near_m + rig.far_m) / 2}));
    CHECK(!in_frustum(rig, {0, 0, rig.far_m + 1}));
    CHECK(!in_frustum(rig, {0, 0, rig.near_m / 2}));
    // a point just outside the horizontal field of view
    CHECK(!in_frustum(rig, {-1.1, 0, 1}));
}

TEST_CASE("in_frustum implies valid pixel coordinates") {
    const CameraRig rig = axis_rig(640, 480, 70.0);
    Rng rng(11);
    for (int i = 0; i < 2000; ++i) {
        const Vec3 p{rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(-20, 120)};
        if (!in_frustum(rig, p)) continue;
        const auto ip = project(rig, p);
        REQUIRE(ip.has_value());
        CHECK(ip->u >= 0);
        CHECK(ip->u < rig.width);
        CHECK(ip->v >= 0);
        CHECK(ip->v < rig.height);
    }
}

TEST_CASE("visibility with no occluders is 1") {
    const CameraRig rig = axis_rig();
    CHECK(visibility(rig, {{0, 1, 5}, {0.2, 1.2, 5}}, {}) == 1.0);
}

TEST_CASE("a collinear occluder blocks every keypoint") {
    const CameraRig rig = axis_rig();
    // subject keypoints clustered around (0, 1, 8); occluder capsule centered
    // on the line of sight at z = 4
    std::vector<Vec3> kps = {{0, 1.0, 8}, {0, 1.1, 8}, {0, 0.9, 8}};
    std::vector<BodyCapsule> occluders = {{{0, -0.0, 4}, 1.9, 0.5}};
    CHECK(visibility(rig, kps, occluders) == 0.0);
}

TEST_CASE("an occluder behind the subject does not block") {
    const CameraRig rig = axis_rig();
    std::vector<Vec3> kps = {{0, 1.0, 8}};
    std::vector<BodyCapsule> occluders = {{{0, 0, 20}, 1.8, 0.3}};
    CHECK(visibility(rig, kps, occluders) == 1.0);
}

TEST_CASE("visibility is monotone in the occluder radius") {
    const CameraRig rig = axis_rig();
    std::vector<Vec3> kps;
    for (int i = 0; i < 7; ++i) kps.push_back({0.3 * i - 0.9, 1.0 + 0.1 * i, 8});
    double prev = 1.0;
    for (double r = 0.05; r < 1.5; r += 0.05) {
        std::vector<BodyCapsule> occluders = {{{0, 0, 4}, 1.8, r}};
        const double v = visibility(rig, kps, occluders);
        CHECK(v <= prev + 1e-12);
        prev = v;
    }
}

TEST_CASE("camera validation catches degenerate rigs") {
    CameraRig rig = axis_rig();
    rig.vertical_fov_deg = 0;
    CHECK_THROWS_AS(rig.validate(), ValidationError);
    rig = axis_rig();
    rig.near_m = 200;
    CHECK_THROWS_AS(rig.validate(), ValidationError);
    rig = axis_rig();
    rig.look_at = rig.position;
    CHECK_THROWS_AS(rig.validate(), ValidationError);
}
