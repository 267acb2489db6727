#include "sagin/units.hpp"
