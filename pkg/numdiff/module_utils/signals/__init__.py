# Signal generation, noise injection and CSV trajectories
