#pragma once

// Reference values of the two published worked examples and the tolerances
// at which computed results are compared against them.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "vsplan/oc_single.hpp"
#include "vsplan/twosided_double.hpp"

namespace vsplan::worked {

struct SingleRef {
  Procedure procedure;
  int n;
  double k;
  double alpha_star;
  double beta_star;
};

/// One row of a calibration table.
struct RowRef {
  double alpha_ss;
  double beta_ss;
  int n1;
  double k1, k2;
  int n2;
  double k3;
  double n_max_onesided;
  double min_oc_p1;
  double max_oc_p2;
};

struct DoubleRef {
  Procedure procedure;
  std::vector<RowRef> table;  ///< published rows, last one final
  double n_max;               ///< max of the two-sided ASN band
};

struct Example {
  std::string name;
  TwoSidedContext ctx;
  SingleRef single[2];
  DoubleRef dbl[2];

  const SingleRef& single_ref(Procedure p) const { return single[p == Procedure::ML ? 0 : 1]; }
  const DoubleRef& double_ref(Procedure p) const { return dbl[p == Procedure::ML ? 0 : 1]; }
};

struct Tolerances {
  double single_k = 1e-8;
  double double_k = 5e-6;
  double n_max_ex1 = 2e-4;
  double n_max_ex2 = 2e-3;
  double band_ex2 = 5e-7;
};

inline Example example1() {
  Example e;
  e.name = "example-1";
  e.ctx = {{1.0, 9.0}, {0.01, 0.06, 0.1, 0.1}};
  e.single[0] = {Procedure::ML, 36, 0.02645943143, 0.082, 0.1};
  e.single[1] = {Procedure::MVU, 34, 0.02262119182, 0.098, 0.094};
  e.dbl[0] = {Procedure::ML,
              {{0.082, 0.1, 25, 0.016988, 0.034411, 19, 0.029059, 31.31538, 0.8882933643, 0.0999999893},
               {0.076, 0.1, 26, 0.017688, 0.034554, 19, 0.029215, 32.16417, 0.8960633610, 0.0999999882},
               {0.072, 0.1, 26, 0.017577, 0.035291, 20, 0.029275, 32.75441, 0.9010124424, 0.0999999889}},
              32.75439};
  e.dbl[1] = {Procedure::MVU,
              {{0.098, 0.094, 24, 0.011840, 0.029264, 18, 0.023800, 30.19915, 0.9002805676, 0.1004854552},
               {0.098, 0.093, 24, 0.012148, 0.029093, 19, 0.023424, 30.34629, 0.9002364848, 0.0995258042}},
              30.34628};
  return e;
}

inline Example example2() {
  Example e;
  e.name = "example-2";
  e.ctx = {{1.0, 9.0}, {0.01, 0.03, 0.1, 0.1}};
  e.single[0] = {Procedure::ML, 115, 0.0178762881, 0.085, 0.1};
  e.single[1] = {Procedure::MVU, 113, 0.01678745123, 0.096, 0.094};
  e.dbl[0] = {Procedure::ML,
              {{0.085, 0.1, 79, 0.013777, 0.021642, 64, 0.018624, 101.1604, 0.8948821204, 0.0999999568},
               {0.083, 0.1, 80, 0.013902, 0.021726, 64, 0.018464, 102.0913, 0.8972199027, 0.0999999565},
               {0.080, 0.1, 81, 0.014029, 0.021742, 66, 0.018537, 103.5434, 0.9008045948, 0.0999999565}},
              103.5434};
  e.dbl[1] = {Procedure::MVU,
              {{0.096, 0.094, 78, 0.012471, 0.020036, 62, 0.017078, 99.13899, 0.9000170882, 0.1014154024},
               {0.096, 0.092, 78, 0.012406, 0.020069, 64, 0.016981, 100.1070, 0.9000091667, 0.0993767725}},
              100.1070};
  return e;
}

inline std::vector<Example> all_examples() { return {example1(), example2()}; }

/// Whether two levels sit on the same point of the 0.001 grid.
inline bool same_level(double a, double b) { return std::abs(a - b) < 1e-9; }

}  // namespace vsplan::worked
