#pragma once

// Umbrella header for the no-reference video quality toolkit.

#include "vqa/common.hpp"
#include "vqa/csf.hpp"
#include "vqa/features.hpp"
#include "vqa/image.hpp"
#include "vqa/losses.hpp"
#include "vqa/manifest.hpp"
#include "vqa/metrics.hpp"
#include "vqa/nn.hpp"
#include "vqa/quality_head.hpp"
#include "vqa/run_config.hpp"
#include "vqa/sampling.hpp"
#include "vqa/synth.hpp"
#include "vqa/training.hpp"
#include "vqa/video_io.hpp"
