# Non-adaptive differentiators: backward difference, Savitzky-Golay, high-gain observer
