# Asymptotics module initialization
