#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "har/errors.hpp"

int main(int argc, char** argv)
{
   har::set_warnings_enabled(false);
   doctest::Context ctx(argc, argv);
   return ctx.run();
}
