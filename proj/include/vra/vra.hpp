#pragma once

#include "vra/crop_geometry.hpp"
#include "vra/errors.hpp"
#include "vra/feature_store.hpp"
#include "vra/inference.hpp"
#include "vra/matrix.hpp"
#include "vra/metrics.hpp"
#include "vra/pooling.hpp"
#include "vra/regressor.hpp"
#include "vra/sequence_sampler.hpp"
#include "vra/trainer.hpp"
