#include "sfseg/pipeline.hpp"
int main(){return 0;}
