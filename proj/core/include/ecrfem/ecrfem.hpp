#pragma once

#include "ecrfem/analysis.hpp"
#include "ecrfem/assembly.hpp"
#include "ecrfem/condense.hpp"
#include "ecrfem/elements.hpp"
#include "ecrfem/equivalence.hpp"
#include "ecrfem/fields.hpp"
#include "ecrfem/linsolve.hpp"
#include "ecrfem/mesh.hpp"
#include "ecrfem/parallel.hpp"
#include "ecrfem/problems.hpp"
#include "ecrfem/quadrature.hpp"
#include "ecrfem/types.hpp"
