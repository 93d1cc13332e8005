#pragma once

#include "pohammer/classes.hpp"
#include "pohammer/errors.hpp"
#include "pohammer/formula.hpp"
#include "pohammer/hom_search.hpp"
#include "pohammer/instances.hpp"
#include "pohammer/model_check.hpp"
#include "pohammer/normalize.hpp"
#include "pohammer/reductions.hpp"
#include "pohammer/structure.hpp"
#include "pohammer/text_io.hpp"
#include "pohammer/transforms.hpp"
