# Ground state module initialization
