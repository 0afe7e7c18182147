# Shared helpers: terminal logger
