#pragma once

#include "nbsparse/dataset.hpp"
#include "nbsparse/error.hpp"
#include "nbsparse/features.hpp"
#include "nbsparse/inference.hpp"
#include "nbsparse/io.hpp"
#include "nbsparse/model.hpp"
#include "nbsparse/optimizer.hpp"
#include "nbsparse/random.hpp"
#include "nbsparse/report.hpp"
#include "nbsparse/selection.hpp"
#include "nbsparse/special.hpp"
#include "nbsparse/synth.hpp"
