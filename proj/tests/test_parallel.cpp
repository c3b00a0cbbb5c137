#include "doctest.h"

#include <cmath>

#include "wgmopo/phasematch.hpp"

using namespace wgmopo;

namespace {

PhaseMatcher make_matcher() {
    return PhaseMatcher{DispersionModel(ResonatorGeometry{2.5e-3, 0.58e-3, 0.5e-3, 100.0},
                                        MaterialModel::default_mg_linbo3())};
}

bool identical(const ChannelSample& a, const ChannelSample& b) {
    return a.valid == b.valid && a.m_p == b.m_p && a.m_s == b.m_s && a.m_i == b.m_i &&
           a.t_raw_c == b.t_raw_c && a.t_cal_c == b.t_cal_c && a.lambda_s_m == b.lambda_s_m &&
           a.lambda_i_m == b.lambda_i_m && a.residual_hz == b.residual_hz;
}

} // namespace

TEST_SUITE("parallel") {

TEST_CASE("parallel channel scan is bitwise identical to the serial reference") {
    const PhaseMatcher pm = make_matcher();
    const std::vector<Channel> channels = {Channel{}, Channel{3, 3, 0, 0, "q133"},
                                           Channel{1, 1, 1, 1, "p11"}};
    const auto serial = pm.scan_channels_serial(532e-9, channels, 98.0, 103.0, 0.1);
    for (int threads : {1, 2, 4}) {
        const auto par = pm.scan_channels(532e-9, channels, 98.0, 103.0, 0.1, threads);
        REQUIRE(par.size() == serial.size());
        for (size_t c = 0; c < par.size(); ++c) {
            REQUIRE(par[c].samples.size() == serial[c].samples.size());
            for (size_t k = 0; k < par[c].samples.size(); ++k)
                CHECK(identical(par[c].samples[k], serial[c].samples[k]));
        }
    }
}

TEST_CASE("parallel map scan is deterministic across thread counts") {
    MaterialModel mat = MaterialModel::default_mg_linbo3();
    ResonatorGeometry base{2.5e-3, 0.58e-3, 0.5e-3, 100.0};
    const std::vector<double> radii = {0.5e-3, 1.0e-3, 1.8e-3, 2.5e-3};
    const auto one = scan_radius_wavelength(mat, base, MapMode::ByRadius, radii, 532e-9,
                                            {{"cs_d1", 894.593e-9}}, 21.0, 245.0, 1, 8);
    const auto four = scan_radius_wavelength(mat, base, MapMode::ByRadius, radii, 532e-9,
                                             {{"cs_d1", 894.593e-9}}, 21.0, 245.0, 4, 8);
    REQUIRE(one.points.size() == four.points.size());
    for (size_t i = 0; i < one.points.size(); ++i) {
        CHECK(one.points[i].degenerate_found == four.points[i].degenerate_found);
        CHECK(one.points[i].degeneracy_t_raw_c == four.points[i].degeneracy_t_raw_c);
        REQUIRE(one.points[i].crossings.size() == four.points[i].crossings.size());
        for (size_t j = 0; j < one.points[i].crossings.size(); ++j) {
            CHECK(one.points[i].crossings[j].found == four.points[i].crossings[j].found);
            CHECK(one.points[i].crossings[j].t_raw_c == four.points[i].crossings[j].t_raw_c);
        }
        REQUIRE(one.points[i].curve.size() == four.points[i].curve.size());
    }
}

}
