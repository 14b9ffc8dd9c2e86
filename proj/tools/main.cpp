#include <iostream>

int main() {
    std::cout << "mrir: not wired yet\n";
    return 0;
}
