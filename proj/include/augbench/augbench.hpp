#pragma once

#include "augbench/apportion.hpp"
#include "augbench/augment.hpp"
#include "augbench/classifiers/classifier.hpp"
#include "augbench/dataio.hpp"
#include "augbench/gan.hpp"
#include "augbench/gmm.hpp"
#include "augbench/harness/cli.hpp"
#include "augbench/harness/config.hpp"
#include "augbench/harness/experiment.hpp"
#include "augbench/harness/report.hpp"
#include "augbench/log.hpp"
#include "augbench/matrix.hpp"
#include "augbench/metrics.hpp"
#include "augbench/mlp.hpp"
#include "augbench/rng.hpp"
#include "augbench/vae.hpp"
