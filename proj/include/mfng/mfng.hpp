#pragma once

#include "mfng/errors.hpp"
#include "mfng/features.hpp"
#include "mfng/fitter.hpp"
#include "mfng/graph.hpp"
#include "mfng/io.hpp"
#include "mfng/measure.hpp"
#include "mfng/moments.hpp"
#include "mfng/oracle.hpp"
#include "mfng/random.hpp"
#include "mfng/sampler.hpp"
