// Placeholder; the CLI is filled in once the io layer lands.
int main() { return 0; }
