//! Simulation harness. (implementation pending)
