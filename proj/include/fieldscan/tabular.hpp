#pragma once

// Dataset model, CSV ingestion, column statistics, normalization,
// discretization and the mixed-type distance.

#include "fieldscan/csv.hpp"
#include "fieldscan/dataset.hpp"
#include "fieldscan/distance.hpp"
#include "fieldscan/stats.hpp"
