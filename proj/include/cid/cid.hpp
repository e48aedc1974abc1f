#pragma once

#include "cid/common.hpp"
#include "cid/spatial_index.hpp"
#include "cid/geometry.hpp"
#include "cid/sampling.hpp"
#include "cid/segmentation.hpp"
#include "cid/convex_hull.hpp"
#include "cid/abstraction.hpp"
#include "cid/metrics.hpp"
#include "cid/synth.hpp"
#include "cid/io.hpp"
#include "cid/pipeline.hpp"
