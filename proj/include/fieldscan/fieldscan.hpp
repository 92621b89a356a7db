#pragma once

#include "fieldscan/affidavit_prep.hpp"
#include "fieldscan/detectors.hpp"
#include "fieldscan/learners.hpp"
#include "fieldscan/procedures.hpp"
#include "fieldscan/synthbench.hpp"
#include "fieldscan/tabular.hpp"
