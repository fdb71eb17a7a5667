#ifndef EQCORR_EQCORR_HPP
#define EQCORR_EQCORR_HPP

#include "config.hpp"
#include "csv.hpp"
#include "curve.hpp"
#include "error.hpp"
#include "experiment.hpp"
#include "metrics.hpp"
#include "monte_carlo.hpp"
#include "normal.hpp"
#include "oracle.hpp"
#include "presets.hpp"
#include "procedures.hpp"
#include "random_stream.hpp"
#include "report.hpp"
#include "sampler.hpp"
#include "svg.hpp"
#include "types.hpp"

#endif // EQCORR_EQCORR_HPP
