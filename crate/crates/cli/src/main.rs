fn main() {
    std::process::exit(ppconv::run(std::env::args_os()));
}
