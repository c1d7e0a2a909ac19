#pragma once

// Umbrella header: label-noise detection via convolutional-autoencoder latent
// clustering, plus the baselines and evaluation metrics around it.

#include "latentclean/baselines.hpp"
#include "latentclean/cae.hpp"
#include "latentclean/dataset.hpp"
#include "latentclean/dbscan.hpp"
#include "latentclean/errors.hpp"
#include "latentclean/evaluation.hpp"
#include "latentclean/layers.hpp"
#include "latentclean/linalg.hpp"
#include "latentclean/optimizer.hpp"
#include "latentclean/params_io.hpp"
#include "latentclean/pipeline.hpp"
#include "latentclean/synthdata.hpp"
#include "latentclean/tensor.hpp"
#include "latentclean/util.hpp"
