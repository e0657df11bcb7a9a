#ifndef WISENSE_ESTIMATOR_HPP
#define WISENSE_ESTIMATOR_HPP

#include "wisense/estimator/dataset.hpp"
#include "wisense/estimator/heatmap.hpp"
#include "wisense/estimator/losses.hpp"
#include "wisense/estimator/model.hpp"
#include "wisense/estimator/train.hpp"

#endif  // WISENSE_ESTIMATOR_HPP
