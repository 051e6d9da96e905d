#pragma once

#include "bumpwatch/classifier.hpp"
#include "bumpwatch/detector.hpp"
#include "bumpwatch/dtw.hpp"
#include "bumpwatch/error.hpp"
#include "bumpwatch/eval.hpp"
#include "bumpwatch/filter.hpp"
#include "bumpwatch/formats.hpp"
#include "bumpwatch/live.hpp"
#include "bumpwatch/recording_io.hpp"
#include "bumpwatch/sensor.hpp"
#include "bumpwatch/synth.hpp"
#include "bumpwatch/templates.hpp"
