// Line-delimited JSON black box for subprocess-oracle tests.
//
//   stub_oracle [--constant LABEL] [--regress] [--die-after N] [--garbage]
//               [--wrong-count] [--sleep SECONDS]
//
// Default rule: class "1" when the first numeric value exceeds 0.5, else "0".
// --regress answers the sum of all numeric values.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>

#include "json.hpp"

int main(int argc, char** argv) {
    std::string constant;
    bool regress = false, garbage = false, wrong_count = false;
    long die_after = -1;
    double sleep_s = 0.0;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--constant" && i + 1 < argc) constant = argv[++i];
        else if (a == "--regress") regress = true;
        else if (a == "--die-after" && i + 1 < argc) die_after = std::atol(argv[++i]);
        else if (a == "--garbage") garbage = true;
        else if (a == "--wrong-count") wrong_count = true;
        else if (a == "--sleep" && i + 1 < argc) sleep_s = std::atof(argv[++i]);
    }
    std::string line;
    long served = 0;
    while (std::getline(std::cin, line)) {
        if (die_after >= 0 && served >= die_after) return 3;
        if (sleep_s > 0) std::this_thread::sleep_for(std::chrono::duration<double>(sleep_s));
        if (garbage) {
            std::cout << "this is not json" << std::endl;
            continue;
        }
        auto req = nlohmann::json::parse(line);
        nlohmann::json preds = nlohmann::json::array();
        for (const auto& inst : req.at("instances")) {
            if (regress) {
                double s = 0.0;
                for (const auto& v : inst)
                    if (v.is_number()) s += v.get<double>();
                preds.push_back(s);
                continue;
            }
            if (!constant.empty()) {
                preds.push_back(constant);
                continue;
            }
            std::string label = "0";
            for (const auto& v : inst) {
                if (v.is_number()) {
                    label = v.get<double>() > 0.5 ? "1" : "0";
                    break;
                }
            }
            preds.push_back(label);
        }
        if (wrong_count) preds.push_back("0");
        std::cout << nlohmann::json{{"predictions", preds}}.dump() << std::endl;
        ++served;
    }
    return 0;
}
