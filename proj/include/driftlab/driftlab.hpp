#pragma once

#include "driftlab/ande.hpp"
#include "driftlab/baselines.hpp"
#include "driftlab/counts.hpp"
#include "driftlab/driftgen.hpp"
#include "driftlab/errors.hpp"
#include "driftlab/eval.hpp"
#include "driftlab/forgetting.hpp"
#include "driftlab/ingest.hpp"
#include "driftlab/io.hpp"
#include "driftlab/rng.hpp"
#include "driftlab/schema.hpp"
