#pragma once

#include "activity.hpp"
#include "corpus.hpp"
#include "error.hpp"
#include "features.hpp"
#include "labels.hpp"
#include "localize.hpp"
#include "metrics.hpp"
#include "model_io.hpp"
#include "naive_bayes.hpp"
#include "orientation.hpp"
#include "pipeline.hpp"
#include "scheduler.hpp"
#include "simulator.hpp"
#include "texting.hpp"
#include "trace_io.hpp"
