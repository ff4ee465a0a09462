#ifndef ADSG_ALL_HPP
#define ADSG_ALL_HPP

#include "adsg.hpp"
#include "baselines.hpp"
#include "dataset.hpp"
#include "estimator.hpp"
#include "harness.hpp"
#include "lazy_momentum.hpp"
#include "loss.hpp"
#include "problem.hpp"
#include "reductions.hpp"
#include "regularizer.hpp"
#include "rng.hpp"
#include "schedule.hpp"
#include "solver_common.hpp"
#include "synthetic.hpp"

#endif
