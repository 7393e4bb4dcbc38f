#pragma once

#include "commbench/commutators.hpp"
#include "commbench/embeddings.hpp"
#include "commbench/error.hpp"
#include "commbench/geometry.hpp"
#include "commbench/harness.hpp"
#include "commbench/necessity.hpp"
#include "commbench/operators.hpp"
#include "commbench/spaces.hpp"
#include "commbench/weights.hpp"
