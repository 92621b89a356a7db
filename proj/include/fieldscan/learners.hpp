#pragma once

// Supervised learners: information-theoretic attribute ranking, C4.5,
// PRISM and naive Bayes, plus the shared rule representation.

#include "fieldscan/c45.hpp"
#include "fieldscan/information.hpp"
#include "fieldscan/naive_bayes.hpp"
#include "fieldscan/prism.hpp"
#include "fieldscan/rules.hpp"
