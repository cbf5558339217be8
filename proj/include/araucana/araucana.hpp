#ifndef ARAUCANA_ARAUCANA_HPP
#define ARAUCANA_ARAUCANA_HPP

#include "araucana/cart.hpp"
#include "araucana/error.hpp"
#include "araucana/explain.hpp"
#include "araucana/fidelity.hpp"
#include "araucana/gower.hpp"
#include "araucana/oracle.hpp"
#include "araucana/random.hpp"
#include "araucana/smote.hpp"
#include "araucana/subprocess.hpp"
#include "araucana/synth.hpp"
#include "araucana/tabular.hpp"

#endif
