#ifndef FPTEST_FPTEST_HPP
#define FPTEST_FPTEST_HPP

#include "fptest/bl_metric.hpp"
#include "fptest/fp_tests.hpp"
#include "fptest/harness.hpp"
#include "fptest/hypotheses.hpp"
#include "fptest/kernels.hpp"
#include "fptest/measure.hpp"
#include "fptest/open_set.hpp"
#include "fptest/point.hpp"
#include "fptest/rational.hpp"
#include "fptest/rng.hpp"
#include "fptest/sampling.hpp"
#include "fptest/space.hpp"
#include "fptest/transport.hpp"

#endif  // FPTEST_FPTEST_HPP
