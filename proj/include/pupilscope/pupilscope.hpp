#pragma once

#include "pupilscope/error.hpp"
#include "pupilscope/eval.hpp"
#include "pupilscope/image.hpp"
#include "pupilscope/iris.hpp"
#include "pupilscope/mask.hpp"
#include "pupilscope/pupil.hpp"
#include "pupilscope/selector.hpp"
#include "pupilscope/synth.hpp"
