#pragma once

#include "hpyc/cli.hpp"
#include "hpyc/context_tree.hpp"
#include "hpyc/corpus.hpp"
#include "hpyc/crp.hpp"
#include "hpyc/eval.hpp"
#include "hpyc/hpylm.hpp"
#include "hpyc/hpylmc.hpp"
#include "hpyc/hyperparameters.hpp"
#include "hpyc/mkn.hpp"
#include "hpyc/model_io.hpp"
#include "hpyc/ngram_counts.hpp"
#include "hpyc/random.hpp"
#include "hpyc/segmentation.hpp"
#include "hpyc/serialize.hpp"
#include "hpyc/slice_sampler.hpp"
