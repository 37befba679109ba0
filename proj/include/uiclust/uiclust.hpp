#ifndef UICLUST_UICLUST_HPP
#define UICLUST_UICLUST_HPP

#include "core.hpp"
#include "kmeans.hpp"
#include "distclust.hpp"
#include "drift.hpp"
#include "engine.hpp"
#include "streamgen.hpp"
#include "evaluation.hpp"

#endif  // UICLUST_UICLUST_HPP
