#pragma once

#include "probcomb/adam.hpp"
#include "probcomb/bound_check.hpp"
#include "probcomb/core.hpp"
#include "probcomb/error.hpp"
#include "probcomb/eval.hpp"
#include "probcomb/hybrid.hpp"
#include "probcomb/io.hpp"
#include "probcomb/nn_combiner.hpp"
#include "probcomb/numfmt.hpp"
#include "probcomb/random.hpp"
#include "probcomb/ref_predictor.hpp"
#include "probcomb/rules.hpp"
#include "probcomb/synth.hpp"
