#ifndef DELGAMES_HPP
#define DELGAMES_HPP

#include "delgames/arena.hpp"
#include "delgames/common.hpp"
#include "delgames/del.hpp"
#include "delgames/fold.hpp"
#include "delgames/formula.hpp"
#include "delgames/game_file.hpp"
#include "delgames/kripke.hpp"
#include "delgames/ltlk.hpp"
#include "delgames/oracle.hpp"
#include "delgames/solve.hpp"
#include "delgames/strategy.hpp"

#endif
