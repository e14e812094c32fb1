#pragma once

#include <string>
#include <vector>

#include "ncr/cavity.hpp"

// Published sample data and the maps derived from it: lattice constant to
// resonant wavelength (linear regression over the five measured reflectance
// peaks), FDTD quality-factor ranges per end-hole shift (linear
// interpolation between the published endpoints), and relative slab
// thickness t* = t/a.
namespace ncr {

enum class HoleShift { none, s01a, s02a }; // end-hole shift 0, 0.1a, 0.2a

HoleShift hole_shift_from_string(const std::string& text); // "none"|"0"|"0.1a"|"0.2a"
std::string to_string(HoleShift shift);

struct LatticeDesign {
    double a_nm = 350.0;
    HoleShift shift = HoleShift::none;

    double hole_radius_nm() const { return 0.3 * a_nm; }
    static constexpr double slab_thickness_nm = 200.0;
};

// Regression line through the measured (a, lambda) anchors; valid for
// a in [340, 500] nm (mild extrapolation beyond the measured 350..390).
double resonant_wavelength(double a_nm);

// Interpolated theoretical quality factor; valid for a in [350, 490] nm,
// exact at the published endpoints. Interior values carry roughly +-10%
// interpolation error.
double q_theo(double a_nm, HoleShift shift);

// 200/a: relative slab thickness.
double relative_thickness(double a_nm);

struct SweepRow {
    double a_nm;
    double lambda_res_nm;
    double t_star;
    double q_theo;
    double r_peak;
};

// How q_theo maps onto the cavity coupling of a sweep row. The default
// split q_cav_x = q_cav_y = 2*q_theo makes the vertical-decay-limited
// total equal q_theo.
struct CouplingPolicy {
    double split_x = 2.0;
    double split_y = 2.0;
    double q_loss = 1e8;
};

std::vector<SweepRow> build_sweep_dataset(HoleShift shift, const std::vector<double>& a_grid_nm,
                                          const SlabGeometry& geometry,
                                          const CouplingPolicy& policy = {});

} // namespace ncr
