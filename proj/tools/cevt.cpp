#include <iostream>

#include "cevt/app.hpp"

int main(int argc, char** argv) { return cevt::main_entry(argc, argv, std::cout, std::cerr); }
