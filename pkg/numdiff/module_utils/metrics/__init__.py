# Delay-aware error metrics
