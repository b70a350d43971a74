# Spectrum module initialization
