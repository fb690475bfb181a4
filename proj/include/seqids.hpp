#pragma once

#include "seqids/types.hpp"
#include "seqids/rng.hpp"
#include "seqids/trace_sim.hpp"
#include "seqids/forest.hpp"
#include "seqids/preprocess.hpp"
#include "seqids/hmm.hpp"
#include "seqids/lstm.hpp"
#include "seqids/eval.hpp"
#include "seqids/io.hpp"
