# Command line module initialization
