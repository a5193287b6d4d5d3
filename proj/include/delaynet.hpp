#pragma once

#include "delaynet/activation.hpp"
#include "delaynet/certify.hpp"
#include "delaynet/engine.hpp"
#include "delaynet/error.hpp"
#include "delaynet/fixed_point.hpp"
#include "delaynet/history.hpp"
#include "delaynet/io.hpp"
#include "delaynet/model.hpp"
#include "delaynet/parallel.hpp"
#include "delaynet/periodic.hpp"
#include "delaynet/random.hpp"
#include "delaynet/rate_bound.hpp"
#include "delaynet/sequence.hpp"
#include "delaynet/validate.hpp"
