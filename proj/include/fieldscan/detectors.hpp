#pragma once

// Unsupervised detectors: LOF, DBSCAN, K-Means and the centroid-gap
// attribute ranking.

#include "fieldscan/dbscan.hpp"
#include "fieldscan/kmeans.hpp"
#include "fieldscan/lof.hpp"
#include "fieldscan/pairwise.hpp"
