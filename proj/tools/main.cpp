#include "lineage/app.hpp"

int main(int argc, char** argv) {
    return lineage::app::run(argc, argv);
}
